//! Marginal maps over `X × Y`, weak duality, and the set-valued
//! Fenchel-type duality formula computed through a finite dual family.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cone::Cone;
use crate::conjugate::{conjugate_function, neg_conjugate_scalar_route, PiecewiseLinearFn};
use crate::continuity::{check_scalar_semicontinuity, CheckerConfig, Mode};
use crate::dd::project;
use crate::error::{check_dim, Error, Result};
use crate::lp::{feasible_point, maximize, Halfspace, LpOutcome};
use crate::rational::{dot, fmt_q, fmt_vec, q, zeros, ExtQ, Q};
use crate::scalarize::{closed_form, window_gap, window_gap_exact, DirectionBase};
use crate::setmap::SetValuedMap;
use crate::upperset::{lattice_inf, lattice_sup, Repr, UpperSet};
use crate::verdict::{Status, Verdict, Witness};

/// A map on `R^n × R^p`, the first `n` coordinates being `x`.
#[derive(Clone, Debug)]
pub struct BivariateMap {
    pub map: SetValuedMap,
    pub n: usize,
    pub p: usize,
}

impl BivariateMap {
    pub fn new(map: SetValuedMap, n: usize) -> Result<Self> {
        let total = map.domain_dim();
        if n > total {
            return Err(Error::DimensionMismatch { expected: total, got: n });
        }
        Ok(BivariateMap { map, n, p: total - n })
    }

    pub fn cone(&self) -> &Cone {
        self.map.cone()
    }

    fn join(&self, x: &[Q], y: &[Q]) -> Result<Vec<Q>> {
        check_dim(self.n, x.len())?;
        check_dim(self.p, y.len())?;
        Ok(x.iter().chain(y).cloned().collect())
    }

    /// The dual variable `(0, y*)` in `X* × Y*`.
    pub fn dual_point(&self, ystar: &[Q]) -> Result<Vec<Q>> {
        self.join(&zeros(self.n), ystar)
    }
}

/// `cl ∪_x f(x, y)`: exact for affine bodies with fixed normals (the `x`
/// variables are eliminated), otherwise the union over `x_grid`.
pub fn marginal(f: &BivariateMap, y: &[Q], x_grid: &[Vec<Q>]) -> Result<UpperSet> {
    check_dim(f.p, y.len())?;
    let c = f.cone();
    let m = c.dim();
    if let Some(a) = f.map.fixed_affine() {
        // N z − L_x x ≥ q + L_y y over (z, x), then drop x
        let rows: Vec<Halfspace> = a
            .normals
            .iter()
            .zip(a.offsets.iter().zip(&a.slopes))
            .map(|(nz, (qi, li))| {
                let mut row = nz.clone();
                row.extend(li[..f.n].iter().map(|v| -v));
                Halfspace::new(row, qi + dot(&li[f.n..], y))
            })
            .collect();
        if feasible_point(m + f.n, &rows).is_none() {
            return Ok(UpperSet::empty(c));
        }
        return UpperSet::from_halfspaces(c, project(&rows, m + f.n, m));
    }
    let values = x_grid
        .iter()
        .map(|x| f.map.evaluate(&f.join(x, y)?))
        .collect::<Result<Vec<_>>>()?;
    lattice_inf(&values)
}

/// `inf_x φ_{(f,z*)}(x, y)`, one LP per piece of the closed form.
pub fn marginal_scalarization(f: &BivariateMap, zstar: &[Q], y: &[Q]) -> Result<ExtQ> {
    check_dim(f.p, y.len())?;
    let phi = closed_form(&f.map, zstar)?;
    Ok(slice_infimum(&phi, f.n, y))
}

/// Rows of a polyhedron in `(x, y)` with `y` substituted.
fn fix_tail(rows: &[Halfspace], n: usize, y: &[Q]) -> Vec<Halfspace> {
    rows.iter()
        .map(|h| Halfspace::new(h.normal[..n].to_vec(), &h.offset - dot(&h.normal[n..], y)))
        .collect()
}

fn slice_infimum(phi: &PiecewiseLinearFn, n: usize, y: &[Q]) -> ExtQ {
    if phi.minus_inf.iter().any(|p| feasible_point(n, &fix_tail(p.rows(), n, y)).is_some()) {
        return ExtQ::NegInf;
    }
    let mut best = ExtQ::PosInf;
    for piece in &phi.pieces {
        let rows = fix_tail(piece.region.rows(), n, y);
        let base = dot(&piece.slope[n..], y) + &piece.constant;
        let obj: Vec<Q> = piece.slope[..n].iter().map(|v| -v).collect();
        let v = match maximize(&obj, &rows) {
            LpOutcome::Optimal { value, .. } => ExtQ::Fin(base - value),
            LpOutcome::Unbounded => ExtQ::NegInf,
            LpOutcome::Infeasible => continue,
        };
        best = best.min(v);
    }
    best
}

/// Checks `f_X(0) ⊆ (−f*)((0, y*), z*)` for each pair by comparing the
/// support of the marginal with the conjugate threshold, and testing the
/// vertices of the marginal against the halfspace.
pub fn weak_duality_check(f: &BivariateMap, pairs: &[(Vec<Q>, Vec<Q>)], x_grid: &[Vec<Q>]) -> Result<Verdict> {
    let lhs = marginal(f, &zeros(f.p), x_grid)?;
    let samples: Vec<Vec<Q>> = match lhs.repr() {
        Repr::Polyhedral(pieces) => pieces.iter().flat_map(|p| p.vrep().points.clone()).collect(),
        Repr::Oracle(_) => Vec::new(),
    };
    for (ystar, zstar) in pairs {
        let rhs = neg_conjugate_scalar_route(&f.map, &f.dual_point(ystar)?, zstar)?;
        let sigma = lhs.support(zstar);
        let witness = |z: Option<Vec<Q>>, detail: String| Witness {
            x: Some(ystar.clone()),
            z,
            radius: None,
            direction: Some(zstar.clone()),
            detail,
        };
        if sigma > rhs.threshold {
            let detail = format!("support {} of the marginal exceeds {}", sigma.label(), rhs.threshold.label());
            return Ok(Verdict::fails(pairs.len(), witness(None, detail)));
        }
        for z in &samples {
            if ExtQ::Fin(dot(zstar, z)) > rhs.threshold {
                return Ok(Verdict::fails(pairs.len(), witness(Some(z.clone()), "marginal vertex outside".into())));
            }
        }
    }
    Ok(Verdict::holds(pairs.len(), None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Properness {
    Proper,
    /// `−∞` somewhere or `+∞` everywhere; the conjugate value is `Z`
    Improper,
    /// proper, but the scalar dual has no maximizer
    Skipped,
}

impl Properness {
    pub fn label(self) -> &'static str {
        match self {
            Properness::Proper => "proper",
            Properness::Improper => "improper",
            Properness::Skipped => "skipped",
        }
    }
}

/// Maximizers `y*_{z*}` of the scalar dual problems, one per proper direction.
#[derive(Clone, Debug, Default)]
pub struct DualFamily {
    pub entries: Vec<(Vec<Q>, Vec<Q>)>,
    pub properness_log: Vec<(Vec<Q>, Properness, String)>,
}

impl DualFamily {
    pub fn get(&self, zstar: &[Q]) -> Option<&[Q]> {
        self.entries.iter().find(|(z, _)| z == zstar).map(|(_, y)| y.as_slice())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "entries": self.entries.iter().map(|(z, y)| json!({"zstar": fmt_vec(z), "ystar": fmt_vec(y)})).collect::<Vec<_>>(),
            "properness": self.properness_log.iter().map(|(z, p, note)| json!({
                "zstar": fmt_vec(z), "class": p.label(), "note": note,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Support values of both sides in one direction.
#[derive(Clone, Debug)]
pub struct DirectionRow {
    pub zstar: Vec<Q>,
    /// `σ_{f_X(0)}(z*) = −inf_x φ(x, 0)`
    pub lhs_support: ExtQ,
    /// `φ*(0, y*_{z*})`, `+∞` for dropped directions
    pub rhs_threshold: ExtQ,
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub lhs: UpperSet,
    pub rhs: UpperSet,
    pub family: DualFamily,
    pub rows: Vec<DirectionRow>,
    /// window-restricted Hausdorff distance
    pub gap: f64,
    /// the same distance in exact arithmetic when both sides are polyhedral;
    /// `Some(None)` means infinite
    pub gap_exact: Option<Option<Q>>,
    pub regularity: Verdict,
}

impl DualityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "directions": self.rows.iter().map(|r| fmt_vec(&r.zstar)).collect::<Vec<_>>(),
            "family": self.family.to_json(),
            "supports": self.rows.iter().map(|r| json!({
                "zstar": fmt_vec(&r.zstar),
                "lhs": r.lhs_support.label(),
                "rhs": r.rhs_threshold.label(),
            })).collect::<Vec<_>>(),
            "gap": self.gap,
            "gap_exact": match &self.gap_exact {
                Some(Some(g)) => Value::String(fmt_q(g)),
                Some(None) => Value::String("+inf".into()),
                None => Value::Null,
            },
            "regularity": self.regularity.to_json(),
        })
    }
}

/// Lexicographically smallest maximizer of `y* ↦ −φ*(0, y*)` with its value,
/// `None` when the maximum is not attained.
fn scalar_dual(phi: &PiecewiseLinearFn, n: usize, p: usize) -> Result<Option<(Vec<Q>, Q)>> {
    let conj = conjugate_function(phi)?;
    let form = conj.max_affine.as_ref().expect("conjugates are built in max-affine form");
    // variables (y*, s): s ≥ a_y·y* + d on the slice x* = 0 of dom φ*
    let mut rows: Vec<Halfspace> = fix_tail_front(form.domain.rows(), n, p);
    for (a, d) in &form.affines {
        let mut v: Vec<Q> = a[n..].iter().map(|c| -c).collect();
        v.push(Q::one());
        rows.push(Halfspace::new(v, d.clone()));
    }
    if form.affines.is_empty() {
        return Ok(None);
    }
    let mut obj = zeros(p + 1);
    obj[p] = -Q::one();
    let best = match maximize(&obj, &rows) {
        LpOutcome::Optimal { value, point } => (-value, point),
        _ => return Ok(None),
    };
    let (s_opt, mut point) = best;
    let mut cap = zeros(p + 1);
    cap[p] = -Q::one();
    rows.push(Halfspace::new(cap, -s_opt.clone()));
    for i in 0..p {
        let mut obj = zeros(p + 1);
        obj[i] = -Q::one();
        match maximize(&obj, &rows) {
            LpOutcome::Optimal { point: pt, .. } => {
                let mut fix = zeros(p + 1);
                fix[i] = -Q::one();
                rows.push(Halfspace::new(fix, -pt[i].clone()));
                point = pt;
            }
            _ => break,
        }
    }
    Ok(Some((point[..p].to_vec(), -s_opt)))
}

/// Rows over `(x*, y*)` restricted to `x* = 0`, padded with a zero column for `s`.
fn fix_tail_front(rows: &[Halfspace], n: usize, _p: usize) -> Vec<Halfspace> {
    rows.iter()
        .map(|h| {
            let mut v = h.normal[n..].to_vec();
            v.push(Q::zero());
            Halfspace::new(v, h.offset.clone())
        })
        .collect()
}

/// `f_X(0)` against the intersection of `(−f*)((0, y*_{z*}), z*)` over the
/// proper base directions. Refuses when `y ↦ φ_{(f(x0,·),z*)}(y)` cannot be
/// certified upper semicontinuous at `0` for every base direction.
pub fn fundamental_duality(
    f: &BivariateMap,
    x0: &[Q],
    base: &DirectionBase,
    cfg: &CheckerConfig,
) -> Result<DualityReport> {
    if !f.cone().equivalent(&base.cone) {
        return Err(Error::ConeMismatch);
    }
    let origin = zeros(f.p);
    let at = f.join(x0, &origin)?;
    if f.map.evaluate(&at)?.is_empty() {
        return Err(Error::RegularityViolated("(x0, 0) lies outside the domain".into()));
    }
    let slice = f.map.restrict_prefix(x0)?;
    let regularity = check_scalar_semicontinuity(&slice, &origin, base, cfg, Mode::Usc)?;
    if regularity.status != Status::Holds {
        let why = regularity.witness.as_ref().map(|w| w.detail.clone()).unwrap_or_default();
        return Err(Error::RegularityViolated(format!(
            "scalarizations of y -> f(x0, y) not certified upper semicontinuous at 0 ({}): {why}",
            regularity.status
        )));
    }
    let lhs = marginal(f, &origin, &[x0.to_vec()])?;
    let mut family = DualFamily::default();
    let mut rows = Vec::new();
    let mut halfspaces = Vec::new();
    for zstar in &base.directions {
        let phi = closed_form(&f.map, zstar)?;
        let lhs_support = -slice_infimum(&phi, f.n, &origin);
        let mut threshold = ExtQ::PosInf;
        if !phi.is_proper() {
            family.properness_log.push((zstar.clone(), Properness::Improper, "conjugate value is Z".into()));
        } else {
            match scalar_dual(&phi, f.n, f.p)? {
                Some((ystar, value)) => {
                    let v = neg_conjugate_scalar_route(&f.map, &f.dual_point(&ystar)?, zstar)?;
                    let note = format!("dual value {}", fmt_q(&value));
                    threshold = v.threshold.clone();
                    halfspaces.push(v.value);
                    family.entries.push((zstar.clone(), ystar));
                    family.properness_log.push((zstar.clone(), Properness::Proper, note));
                }
                None => {
                    family.properness_log.push((zstar.clone(), Properness::Skipped, "scalar dual not attained".into()));
                }
            }
        }
        rows.push(DirectionRow { zstar: zstar.clone(), lhs_support, rhs_threshold: threshold });
    }
    let rhs = if halfspaces.is_empty() { UpperSet::universe(f.cone()) } else { lattice_sup(&halfspaces)? };
    let window = cfg.window(f.cone().dim());
    let gap = window_gap(&lhs, &rhs, &window)?;
    let gap_exact = if lhs.is_polyhedral() && rhs.is_polyhedral() { Some(window_gap_exact(&lhs, &rhs, &window)?) } else { None };
    Ok(DualityReport { lhs, rhs, family, rows, gap, gap_exact, regularity })
}

/// `∩ (−f*)((0, y*), z*)` over the given pairs.
pub fn rhs_from_pairs(f: &BivariateMap, pairs: &[(Vec<Q>, Vec<Q>)]) -> Result<UpperSet> {
    let values = pairs
        .iter()
        .map(|(y, z)| neg_conjugate_scalar_route(&f.map, &f.dual_point(y)?, z).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Ok(UpperSet::universe(f.cone()));
    }
    lattice_sup(&values)
}

/// Seeded dual pairs: `y*` with entries in `{−3, −5/2, …, 3}` and `z*` a
/// nonzero combination of the generators of `C^−` with weights in `0..=3`.
pub fn random_pairs(f: &BivariateMap, count: usize, seed: u64) -> Vec<(Vec<Q>, Vec<Q>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = f.cone().dual_generators().to_vec();
    let m = f.cone().dim();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let ystar: Vec<Q> = (0..f.p).map(|_| Q::new(rng.gen_range(-6i64..=6).into(), 2.into())).collect();
        let mut zstar = zeros(m);
        for g in &gens {
            let w = q(rng.gen_range(0i64..=3));
            for (zi, gi) in zstar.iter_mut().zip(g) {
                *zi += &w * gi;
            }
        }
        if zstar.iter().all(|v| v.is_zero()) {
            continue;
        }
        out.push((ystar, zstar));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::conjugate::dyadic_grid;
    use crate::rational::{qr, qvec};
    use crate::upperset::embed_point;

    /// `{z ≥ |x| + |x − y|}` over `R_+`.
    fn two_kinks() -> BivariateMap {
        let c = Cone::orthant(1);
        let slopes = vec![qvec(&[2, -1]), qvec(&[0, 1]), qvec(&[0, -1]), qvec(&[-2, 1])];
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[1]); 4], vec![q(0); 4], slopes).unwrap();
        BivariateMap::new(map, 1).unwrap()
    }

    /// `{z ≥ max(1 − y, 2y + 1)}`, constant in x.
    fn x_free() -> BivariateMap {
        let c = Cone::orthant(1);
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[1]); 2], vec![q(1); 2], vec![qvec(&[0, -1]), qvec(&[0, 2])]).unwrap();
        BivariateMap::new(map, 1).unwrap()
    }

    /// `(|x| + |x − y|, |y|) + R²_+`.
    fn planar() -> BivariateMap {
        let c = Cone::orthant(2);
        let mut normals = vec![qvec(&[1, 0]); 4];
        normals.extend([qvec(&[0, 1]), qvec(&[0, 1])]);
        let slopes = vec![qvec(&[2, -1]), qvec(&[0, 1]), qvec(&[0, -1]), qvec(&[-2, 1]), qvec(&[0, 1]), qvec(&[0, -1])];
        let map = SetValuedMap::affine(2, &c, normals, vec![q(0); 6], slopes).unwrap();
        BivariateMap::new(map, 1).unwrap()
    }

    /// `{z ≥ |x|}` restricted to `y ≥ x`.
    fn cliff() -> BivariateMap {
        let c = Cone::orthant(1);
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[1]), qvec(&[1]), qvec(&[0])], vec![q(0); 3], vec![
            qvec(&[1, 0]),
            qvec(&[-1, 0]),
            qvec(&[1, -1]),
        ])
        .unwrap();
        BivariateMap::new(map, 1).unwrap()
    }

    fn halfline(c: &Cone, t: i64) -> UpperSet {
        embed_point(&qvec(&[t]), c)
    }

    #[test]
    fn marginal_of_two_kinks() {
        let f = two_kinks();
        let m = marginal(&f, &qvec(&[0]), &[]).unwrap();
        assert!(m.as_polyhedron().unwrap().equivalent(halfline(f.cone(), 0).as_polyhedron().unwrap()));
        // at y = 2 the infimum of |x| + |x − 2| is 2
        let m2 = marginal(&f, &qvec(&[2]), &[]).unwrap();
        assert_eq!(m2.support(&qvec(&[-1])), ExtQ::Fin(q(-2)));
        // the grid union is an inner approximation with the same support here
        let grid = dyadic_grid(1, 4, 4);
        let inner = marginal(&BivariateMap::new(constant_copy(&f), 1).unwrap(), &qvec(&[2]), &grid);
        assert!(inner.is_ok());
    }

    /// The same map behind a non-affine body, forcing the grid path.
    fn constant_copy(f: &BivariateMap) -> SetValuedMap {
        use crate::setmap::{Body, Guard};
        let a = f.map.fixed_affine().unwrap().clone();
        let body = Body::Piecewise {
            guard: Guard { normal: qvec(&[0, 0]), offset: q(0), strict: false },
            then: Box::new(Body::Affine(a.clone())),
            otherwise: Box::new(Body::Affine(a)),
        };
        SetValuedMap::new(2, f.cone(), body).unwrap()
    }

    #[test]
    fn grid_marginal_matches_exact_on_grid_minimizer() {
        let f = two_kinks();
        let g = BivariateMap::new(constant_copy(&f), 1).unwrap();
        let grid = dyadic_grid(1, 4, 4);
        for y in [-2, 0, 1, 3] {
            let exact = marginal(&f, &qvec(&[y]), &[]).unwrap();
            let inner = marginal(&g, &qvec(&[y]), &grid).unwrap();
            assert_eq!(exact.support(&qvec(&[-1])), inner.support(&qvec(&[-1])), "y = {y}");
        }
    }

    #[test]
    fn marginal_scalarization_brute_force() {
        let f = two_kinks();
        for y in [-3, -1, 0, 2, 5] {
            let y = qvec(&[y]);
            let got = marginal_scalarization(&f, &qvec(&[-1]), &y).unwrap();
            // min over a lattice that contains the minimizers
            let brute = (-40..=40)
                .map(|i| {
                    let x = qr(i, 4);
                    let v: Q = num_traits::Signed::abs(&x) + num_traits::Signed::abs(&(&x - &y[0]));
                    v
                })
                .min()
                .unwrap();
            assert_eq!(got, ExtQ::Fin(brute.clone()));
            let m = marginal(&f, &y, &[]).unwrap();
            assert_eq!(got, -m.support(&qvec(&[-1])));
        }
    }

    #[test]
    fn marginal_scalarization_propagates_minus_infinity() {
        let c = Cone::orthant(1);
        // z ≥ x + y: unbounded below in x
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[1])], vec![q(0)], vec![qvec(&[1, 1])]).unwrap();
        let f = BivariateMap::new(map, 1).unwrap();
        assert_eq!(marginal_scalarization(&f, &qvec(&[-1]), &qvec(&[0])).unwrap(), ExtQ::NegInf);
    }

    #[test]
    fn weak_duality_examples() {
        let f = two_kinks();
        let v = weak_duality_check(&f, &[(qvec(&[0]), qvec(&[-1]))], &[]).unwrap();
        assert_eq!(v.status, Status::Holds);
        let wide = neg_conjugate_scalar_route(&f.map, &f.dual_point(&qvec(&[5])).unwrap(), &qvec(&[-1])).unwrap();
        assert!(wide.value.is_universe());
        let tight = neg_conjugate_scalar_route(&f.map, &f.dual_point(&qvec(&[0])).unwrap(), &qvec(&[-1])).unwrap();
        assert_eq!(tight.threshold, ExtQ::Fin(q(0)));
        for fx in [two_kinks(), x_free(), planar(), cliff()] {
            let pairs = random_pairs(&fx, 50, 7);
            assert_eq!(weak_duality_check(&fx, &pairs, &[]).unwrap().status, Status::Holds);
        }
    }

    #[test]
    fn weak_duality_with_empty_marginal() {
        let c = Cone::orthant(1);
        // 0 ≥ 1 never holds
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[0])], vec![q(1)], vec![qvec(&[0, 0])]).unwrap();
        let f = BivariateMap::new(map, 1).unwrap();
        assert!(marginal(&f, &qvec(&[0]), &[]).unwrap().is_empty());
        let pairs = random_pairs(&f, 10, 1);
        assert_eq!(weak_duality_check(&f, &pairs, &[]).unwrap().status, Status::Holds);
    }

    #[test]
    fn strong_duality_two_kinks() {
        let f = two_kinks();
        let base = DirectionBase::fan(f.cone(), 8);
        let r = fundamental_duality(&f, &qvec(&[0]), &base, &CheckerConfig::default()).unwrap();
        // every y* in [−1, 1] is optimal; the canonical choice is the smallest vertex
        assert_eq!(r.family.entries, vec![(qvec(&[-1]), qvec(&[-1]))]);
        for y in [-1, 0, 1] {
            let v = neg_conjugate_scalar_route(&f.map, &f.dual_point(&qvec(&[y])).unwrap(), &qvec(&[-1])).unwrap();
            assert_eq!(v.threshold, ExtQ::Fin(q(0)));
        }
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.gap_exact, Some(Some(q(0))));
        assert!(r.rhs.as_polyhedron().unwrap().equivalent(halfline(f.cone(), 0).as_polyhedron().unwrap()));
    }

    #[test]
    fn strong_duality_x_free_picks_smallest_subgradient() {
        let f = x_free();
        let base = DirectionBase::fan(f.cone(), 8);
        let r = fundamental_duality(&f, &qvec(&[0]), &base, &CheckerConfig::default()).unwrap();
        // subdifferential of max(1 − y, 2y + 1) at 0 is [−1, 2]
        assert_eq!(r.family.entries, vec![(qvec(&[-1]), qvec(&[-1]))]);
        assert_eq!(r.gap_exact, Some(Some(q(0))));
        assert_eq!(r.rows[0].lhs_support, ExtQ::Fin(q(-1)));
    }

    #[test]
    fn strong_duality_planar_and_cloud() {
        let f = planar();
        let base = DirectionBase::fan(f.cone(), 16);
        let r = fundamental_duality(&f, &qvec(&[0]), &base, &CheckerConfig::default()).unwrap();
        assert_eq!(r.gap_exact, Some(Some(q(0))));
        assert_eq!(r.family.entries.len(), base.len());
        let mut pairs: Vec<_> = r.family.entries.iter().map(|(z, y)| (y.clone(), z.clone())).collect();
        let family_rhs = rhs_from_pairs(&f, &pairs).unwrap();
        pairs.extend(random_pairs(&f, 100, 3));
        let cloud_rhs = rhs_from_pairs(&f, &pairs).unwrap();
        assert!(family_rhs.as_polyhedron().unwrap().equivalent(cloud_rhs.as_polyhedron().unwrap()));
    }

    #[test]
    fn regularity_gate_refuses() {
        let f = cliff();
        let base = DirectionBase::fan(f.cone(), 8);
        match fundamental_duality(&f, &qvec(&[0]), &base, &CheckerConfig::default()) {
            Err(Error::RegularityViolated(_)) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn outside_domain_refused() {
        let f = cliff();
        let base = DirectionBase::fan(f.cone(), 8);
        assert!(matches!(
            fundamental_duality(&f, &qvec(&[1]), &base, &CheckerConfig::default()),
            Err(Error::RegularityViolated(_))
        ));
    }

    #[test]
    fn improper_direction_dropped() {
        let c = Cone::orthant(1);
        let map = SetValuedMap::affine(2, &c, vec![qvec(&[1])], vec![q(0)], vec![qvec(&[1, 1])]).unwrap();
        let f = BivariateMap::new(map, 1).unwrap();
        let base = DirectionBase::fan(f.cone(), 8);
        let r = fundamental_duality(&f, &qvec(&[0]), &base, &CheckerConfig::default()).unwrap();
        assert!(r.family.entries.is_empty());
        assert!(r.lhs.is_universe() && r.rhs.is_universe());
    }
}
