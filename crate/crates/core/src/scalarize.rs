//! Scalarizations `x ↦ −sup{z*·z : z ∈ f(x)}`, the halfspace maps
//! `S_{(x*,z*)}`, and recovery of a map from finitely many scalarizations.

use num_traits::{One, Signed, Zero};

use crate::conjugate::PiecewiseLinearFn;
use crate::cone::Cone;
use crate::dd::cone_generators;
use crate::error::{check_dim, Error, Result};
use crate::lp::{feasible_point, Halfspace};
use crate::oracle::SupportFn;
use crate::polyhedron::{Polyhedron, Window};
use crate::rational::{dot, is_zero_vec, neg_vec, norm1, to_f64, unit, ExtQ, Q};
use crate::setmap::{Body, SetValuedMap};
use crate::upperset::{Repr, UpperSet};

/// `φ_{(f,z*)}(x)`; `+∞` where `f(x) = ∅` and `−∞` where the value is
/// unbounded against `z*`.
pub fn scalarize_eval(f: &SetValuedMap, zstar: &[Q], x: &[Q]) -> Result<ExtQ> {
    f.cone().check_direction(zstar)?;
    let v = f.evaluate(x)?;
    Ok(-v.support(zstar))
}

/// The scalarization of `f` in a fixed direction, with its exact
/// piecewise-linear form when the body admits one.
#[derive(Clone, Debug)]
pub struct Scalarization {
    pub map: SetValuedMap,
    pub zstar: Vec<Q>,
    pub closed_form: Option<PiecewiseLinearFn>,
}

impl Scalarization {
    pub fn new(f: &SetValuedMap, zstar: &[Q]) -> Result<Self> {
        f.cone().check_direction(zstar)?;
        let closed_form = match closed_form(f, zstar) {
            Ok(phi) => Some(phi),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Scalarization { map: f.clone(), zstar: zstar.to_vec(), closed_form })
    }

    pub fn eval(&self, x: &[Q]) -> Result<ExtQ> {
        match &self.closed_form {
            Some(phi) => {
                check_dim(phi.dim, x.len())?;
                Ok(phi.eval(x))
            }
            None => scalarize_eval(&self.map, &self.zstar, x),
        }
    }
}

/// Exact `φ_{(f,z*)}` as a max-affine function.
///
/// For `f(x) = {z : N z ≥ q + L x}` LP duality gives
/// `φ(x) = max{λ·(q + L x) : λ ≥ 0, Nᵀλ = −z*}`, finite on the set where
/// the primal is feasible, and `−∞` there when the dual is infeasible.
pub fn closed_form(f: &SetValuedMap, zstar: &[Q]) -> Result<PiecewiseLinearFn> {
    f.cone().check_direction(zstar)?;
    let n = f.domain_dim();
    match f.body() {
        Body::Constant(v) => Ok(PiecewiseLinearFn::constant(n, -v.support(zstar))),
        Body::Affine(a) if a.fixed_normals() => {
            let r = a.rows();
            let m = f.image_dim();
            // Λ ⊆ Q^r
            let mut rows: Vec<Halfspace> = (0..r).map(|i| Halfspace::new(unit(r, i), Q::zero())).collect();
            let mut kernel: Vec<Vec<Q>> = (0..r).map(|i| unit(r, i)).collect();
            for j in 0..m {
                let col: Vec<Q> = a.normals.iter().map(|row| row[j].clone()).collect();
                rows.push(Halfspace::new(col.clone(), -zstar[j].clone()));
                rows.push(Halfspace::new(neg_vec(&col), zstar[j].clone()));
                kernel.push(col.clone());
                kernel.push(neg_vec(&col));
            }
            // feasibility of N z ≥ q + L x: μ·(q + L x) ≤ 0 on rays μ of {μ ≥ 0, Nᵀμ = 0}
            let domain_rows: Vec<Halfspace> = cone_generators(&kernel, r)
                .iter()
                .map(|mu| {
                    let lt_mu: Vec<Q> = (0..n)
                        .map(|k| mu.iter().zip(&a.slopes).fold(Q::zero(), |acc, (mi, li)| acc + mi * &li[k]))
                        .collect();
                    Halfspace::new(neg_vec(&lt_mu), dot(mu, &a.offsets))
                })
                .collect();
            let domain = Polyhedron::new(n, domain_rows)?;
            let lambda = Polyhedron::new(r, rows)?;
            let mut affines: Vec<(Vec<Q>, Q)> = Vec::new();
            for v in &lambda.vrep().points {
                let slope: Vec<Q> = (0..n)
                    .map(|k| v.iter().zip(&a.slopes).fold(Q::zero(), |acc, (vi, li)| acc + vi * &li[k]))
                    .collect();
                let part = (slope, dot(v, &a.offsets));
                if !affines.contains(&part) {
                    affines.push(part);
                }
            }
            PiecewiseLinearFn::from_max_affine(domain, affines)
        }
        Body::ScaledBase { base, alpha } => {
            // φ(x) = −α(x)·σ_A(z*) on {α ≥ 0}
            if base.is_empty() {
                return Ok(PiecewiseLinearFn::constant(n, ExtQ::PosInf));
            }
            match base.support(zstar) {
                ExtQ::Fin(s) => {
                    let domain = Polyhedron::new(n, vec![Halfspace::new(alpha.coeffs.clone(), -alpha.constant.clone())])?;
                    let slope: Vec<Q> = alpha.coeffs.iter().map(|c| -(c * &s)).collect();
                    PiecewiseLinearFn::from_max_affine(domain, vec![(slope, -(&alpha.constant * &s))])
                }
                _ => Err(Error::Unsupported("scalarization with unbounded base support".into())),
            }
        }
        _ => Err(Error::Unsupported("closed-form scalarization for this body".into())),
    }
}

/// `S_{(x*,z*)}(x) = {z : x*·x + z*·z ≤ 0}`.
pub fn s_map(xstar: &[Q], zstar: &[Q], x: &[Q], c: &Cone) -> Result<UpperSet> {
    check_dim(xstar.len(), x.len())?;
    if is_zero_vec(zstar) {
        return Err(Error::NotInDualCone("zero functional".into()));
    }
    c.check_direction(zstar)?;
    UpperSet::from_halfspaces(c, vec![Halfspace::new(neg_vec(zstar), dot(xstar, x))])
}

/// A finite set of directions in `C^− \ {0}`.
#[derive(Clone, Debug)]
pub struct DirectionBase {
    pub cone: Cone,
    pub directions: Vec<Vec<Q>>,
    pub certified_flags: Option<BaseFlags>,
}

impl DirectionBase {
    /// ℓ1-normalized extreme rays of `C^−` plus fan refinement.
    pub fn fan(c: &Cone, size: usize) -> Self {
        DirectionBase { cone: c.clone(), directions: c.dual_fan(size), certified_flags: None }
    }

    pub fn from_directions(c: &Cone, directions: Vec<Vec<Q>>) -> Result<Self> {
        for d in &directions {
            check_dim(c.dim(), d.len())?;
            c.check_direction(d)?;
        }
        Ok(DirectionBase { cone: c.clone(), directions, certified_flags: None })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Runs `certify_base` and stores the flags.
    pub fn certified(mut self, window: &Window) -> Result<Self> {
        self.certified_flags = Some(certify_base(&self, window)?);
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseFlags {
    /// `sup_{z* ∈ B} z*·z < ∞` on the window
    pub sup_finite: bool,
    /// `inf_{z* ∈ B} sup_{‖z‖∞ ≤ 1} −z*·z`, the least ℓ1 norm in B
    pub infsup_value: Q,
    pub infsup_positive: bool,
    /// `cone B = C^−`
    pub generates_dual: bool,
    /// every direction has ℓ1 norm 1
    pub normalized: bool,
}

impl BaseFlags {
    pub fn all_pass(&self) -> bool {
        self.sup_finite && self.infsup_positive && self.generates_dual
    }
}

/// Checks the base conditions on a finite direction set.
pub fn certify_base(base: &DirectionBase, window: &Window) -> Result<BaseFlags> {
    let c = &base.cone;
    check_dim(c.dim(), window.dim())?;
    // finite B: the sup over B of a linear functional is a max
    let sup_finite = !base.directions.is_empty();
    let infsup_value = base.directions.iter().map(|d| norm1(d)).min().unwrap_or_else(Q::zero);
    let infsup_positive = infsup_value.is_positive();
    let generates_dual = c.dual_generators().iter().all(|g| in_conic_hull(&base.directions, g));
    let normalized = base.directions.iter().all(|d| norm1(d).is_one());
    Ok(BaseFlags { sup_finite, infsup_value, infsup_positive, generates_dual, normalized })
}

/// Whether `g ∈ cone(dirs)`, by LP feasibility of `Σ λ_i d_i = g, λ ≥ 0`.
fn in_conic_hull(dirs: &[Vec<Q>], g: &[Q]) -> bool {
    if is_zero_vec(g) {
        return true;
    }
    let k = dirs.len();
    let mut rows: Vec<Halfspace> = (0..k).map(|i| Halfspace::new(unit(k, i), Q::zero())).collect();
    for (j, gj) in g.iter().enumerate() {
        let col: Vec<Q> = dirs.iter().map(|d| d[j].clone()).collect();
        rows.push(Halfspace::new(col.clone(), gj.clone()));
        rows.push(Halfspace::new(neg_vec(&col), -gj.clone()));
    }
    feasible_point(k, &rows).is_some()
}

/// `⋂_{z* ∈ B} {z : φ_{(f,z*)}(x) ≤ −z*·z}`.
pub fn reconstruct(f: &SetValuedMap, x: &[Q], base: &DirectionBase) -> Result<UpperSet> {
    let c = f.cone();
    if !c.equivalent(&base.cone) {
        return Err(Error::ConeMismatch);
    }
    let v = f.evaluate(x)?;
    let mut rows = Vec::new();
    for d in &base.directions {
        match -v.support(d) {
            ExtQ::PosInf => return Ok(UpperSet::empty(c)),
            ExtQ::NegInf => {}
            ExtQ::Fin(phi) => rows.push(Halfspace::new(neg_vec(d), phi)),
        }
    }
    UpperSet::from_halfspaces(c, rows)
}

/// Hausdorff distance between `A ∩ W` and `B ∩ W`, in the sense
/// `max(sup_{a ∈ A∩W} d(a, B), sup_{b ∈ B∩W} d(b, A))`.
///
/// Exact in the max norm for convex polyhedral pairs. When one side is an
/// oracle, the other must be polyhedral and contain it; distances to the
/// oracle are Euclidean.
pub fn window_gap(a: &UpperSet, b: &UpperSet, w: &Window) -> Result<f64> {
    match (a.repr(), b.repr()) {
        (Repr::Polyhedral(_), Repr::Polyhedral(_)) => Ok(window_gap_exact(a, b, w)?.map_or(f64::INFINITY, |g| to_f64(&g))),
        (Repr::Oracle(o), Repr::Polyhedral(_)) => oracle_gap(o.as_ref(), b, w),
        (Repr::Polyhedral(_), Repr::Oracle(o)) => oracle_gap(o.as_ref(), a, w),
        (Repr::Oracle(p), Repr::Oracle(q)) => {
            if p.contains_set(q.as_ref()) == Some(true) && q.contains_set(p.as_ref()) == Some(true) {
                Ok(0.0)
            } else {
                Err(Error::Unsupported("window gap between distinct oracle sets".into()))
            }
        }
    }
}

/// Exact max-norm window gap for convex polyhedral sets; `None` is `+∞`.
pub fn window_gap_exact(a: &UpperSet, b: &UpperSet, w: &Window) -> Result<Option<Q>> {
    check_dim(a.dim(), w.dim())?;
    check_dim(b.dim(), w.dim())?;
    let pa = convex_piece(a)?;
    let pb = convex_piece(b)?;
    let ca = pa.clip(w);
    let cb = pb.clip(w);
    match (ca.is_empty(), cb.is_empty()) {
        (true, true) => return Ok(Some(Q::zero())),
        (true, false) | (false, true) => return Ok(None),
        _ => {}
    }
    let mut gap = Q::zero();
    for (from, to) in [(&ca, &pb), (&cb, &pa)] {
        for v in &from.vrep().points {
            let (d, _) = to.dist_inf(v).expect("target is nonempty");
            if d > gap {
                gap = d;
            }
        }
    }
    Ok(Some(gap))
}

fn convex_piece(a: &UpperSet) -> Result<Polyhedron> {
    match a.pieces() {
        Some([]) => Ok(Polyhedron::empty(a.dim())),
        Some([p]) => Ok(p.clone()),
        Some(_) => Err(Error::NonConvexOperand("union of polyhedra".into())),
        None => Err(Error::Unsupported("oracle set".into())),
    }
}

/// Gap between an oracle set `F` and a polyhedral outer set `R ⊇ F`.
fn oracle_gap(f: &dyn SupportFn, r: &UpperSet, w: &Window) -> Result<f64> {
    let p = convex_piece(r)?;
    // F ⊆ {n·z ≥ b} iff −σ_F(−n) ≥ b
    for h in p.rows() {
        let inf = -f.support(&neg_vec(&h.normal));
        if inf < ExtQ::Fin(h.offset.clone()) {
            return Err(Error::Unsupported("window gap needs the polyhedral side to contain the oracle".into()));
        }
    }
    let clipped = p.clip(w);
    let mut gap: f64 = 0.0;
    for v in &clipped.vrep().points {
        let pt: Vec<f64> = v.iter().map(to_f64).collect();
        let d = f
            .distance(&pt)
            .ok_or_else(|| Error::Unsupported("oracle without a distance function".into()))?;
        gap = gap.max(d);
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ParabolaSet;
    use crate::rational::{q, qr, qvec};
    use crate::setmap::{AffineFamily, Guard};
    use crate::upperset::embed_point;
    use std::sync::Arc;

    /// `x ≤ 0 ↦ R²_+`, `x > 0 ↦ {z : z1 + x z2 ≥ 1 + x}`.
    fn tilted_map() -> SetValuedMap {
        let c = Cone::orthant(2);
        let body = Body::Piecewise {
            guard: Guard { normal: qvec(&[1]), offset: q(0), strict: true },
            then: Box::new(Body::Affine(AffineFamily {
                normals: vec![qvec(&[1, 0])],
                normal_slopes: vec![vec![qvec(&[0, 1])]],
                offsets: vec![q(1)],
                slopes: vec![qvec(&[1])],
            })),
            otherwise: Box::new(Body::Constant(embed_point(&qvec(&[0, 0]), &c))),
        };
        SetValuedMap::new(1, &c, body).unwrap()
    }

    #[test]
    fn tilted_map_values() {
        let f = tilted_map();
        assert_eq!(scalarize_eval(&f, &qvec(&[-1, -1]), &qvec(&[1])).unwrap(), ExtQ::Fin(q(2)));
        assert_eq!(scalarize_eval(&f, &qvec(&[-1, 0]), &qvec(&[1])).unwrap(), ExtQ::NegInf);
        assert_eq!(scalarize_eval(&f, &qvec(&[-1, -1]), &qvec(&[-1])).unwrap(), ExtQ::Fin(q(0)));
    }

    #[test]
    fn direction_outside_dual_rejected() {
        let f = tilted_map();
        assert!(scalarize_eval(&f, &qvec(&[1, 0]), &qvec(&[1])).is_err());
        assert!(scalarize_eval(&f, &qvec(&[0, 0]), &qvec(&[1])).is_err());
    }

    /// `φ` by brute force: minimize `−z*·z` over lattice points of the value.
    fn brute_phi(f: &SetValuedMap, zstar: &[Q], x: &[Q]) -> Option<Q> {
        let v = f.evaluate(x).unwrap();
        let mut best: Option<Q> = None;
        for i in -40..=40 {
            for j in -40..=40 {
                let z = vec![qr(i, 4), qr(j, 4)];
                if v.contains_exact(&z) == Some(true) {
                    let val = -dot(zstar, &z);
                    if best.as_ref().is_none_or(|b| &val < b) {
                        best = Some(val);
                    }
                }
            }
        }
        best
    }

    fn kinked_map() -> SetValuedMap {
        // {z : z1 ≥ x, z1 ≥ −x, z2 ≥ 1 − x, z1 + z2 ≥ 0}
        let c = Cone::orthant(2);
        SetValuedMap::affine(
            1,
            &c,
            vec![qvec(&[1, 0]), qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])],
            vec![q(0), q(0), q(1), q(0)],
            vec![qvec(&[1]), qvec(&[-1]), qvec(&[-1]), qvec(&[0])],
        )
        .unwrap()
    }

    #[test]
    fn closed_form_matches_lp_and_grid() {
        let f = kinked_map();
        for zs in [[-1, -1], [-2, -1], [-1, 0], [0, -1], [-1, -3]] {
            let zstar = qvec(&zs);
            let phi = closed_form(&f, &zstar).unwrap();
            for xi in -6..=6 {
                let x = vec![qr(xi, 2)];
                let lp = scalarize_eval(&f, &zstar, &x).unwrap();
                assert_eq!(phi.eval(&x), lp, "z*={zs:?} x={xi}/2");
                if let Some(b) = brute_phi(&f, &zstar, &x) {
                    assert_eq!(lp, ExtQ::Fin(b), "brute z*={zs:?} x={xi}/2");
                }
            }
        }
    }

    #[test]
    fn closed_form_infinite_regions() {
        let c = Cone::orthant(2);
        // z1 ≥ x and −z1 ≥ 1 − x: empty for x < 1/2
        let f = SetValuedMap::affine(1, &c, vec![qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[0, 1])], vec![q(0), q(1), q(0)], vec![
            qvec(&[1]),
            qvec(&[-1]),
            qvec(&[0]),
        ]);
        // −z1 ≥ … is not upper closed for R²_+, so construction may reject it
        if let Ok(f) = f {
            let phi = closed_form(&f, &qvec(&[0, -1])).unwrap();
            assert_eq!(phi.eval(&[q(0)]), ExtQ::PosInf);
        }
        // z2 ≥ x: unbounded against (−1, 0)
        let g = SetValuedMap::affine(1, &c, vec![qvec(&[0, 1])], vec![q(0)], vec![qvec(&[1])]).unwrap();
        let phi = closed_form(&g, &qvec(&[-1, 0])).unwrap();
        assert_eq!(phi.eval(&[q(3)]), ExtQ::NegInf);
        assert_eq!(scalarize_eval(&g, &qvec(&[-1, 0]), &[q(3)]).unwrap(), ExtQ::NegInf);
        let phi = closed_form(&g, &qvec(&[0, -2])).unwrap();
        assert_eq!(phi.eval(&[q(3)]), ExtQ::Fin(q(6)));
    }

    #[test]
    fn positive_homogeneity() {
        let f = kinked_map();
        let zstar = qvec(&[-1, -2]);
        for xi in -3..=3 {
            let x = vec![q(xi)];
            let a = scalarize_eval(&f, &zstar, &x).unwrap();
            let b = scalarize_eval(&f, &qvec(&[-3, -6]), &x).unwrap();
            assert_eq!(a.scale_pos(&q(3)), b);
        }
    }

    #[test]
    fn s_map_examples() {
        let c = Cone::orthant(2);
        let s = s_map(&qvec(&[1]), &qvec(&[-1, 0]), &qvec(&[2]), &c).unwrap();
        for i in -4..=4 {
            for j in -4..=4 {
                let z = qvec(&[i, j]);
                assert_eq!(s.contains_exact(&z), Some(i >= 2));
            }
        }
        let s0 = s_map(&qvec(&[0]), &qvec(&[-1, -1]), &qvec(&[5]), &c).unwrap();
        assert_eq!(s0.contains_exact(&qvec(&[0, 0])), Some(true));
        assert_eq!(s0.contains_exact(&qvec(&[-1, 0])), Some(false));
        assert!(s_map(&qvec(&[1]), &qvec(&[0, 0]), &qvec(&[2]), &c).is_err());
    }

    #[test]
    fn base_flags() {
        let c = Cone::orthant(2);
        let w = Window::cube(2, &q(1));
        let rays = DirectionBase::from_directions(&c, vec![qvec(&[-1, 0]), qvec(&[0, -1])]).unwrap();
        let flags = certify_base(&rays, &w).unwrap();
        assert_eq!(flags.infsup_value, q(1));
        assert!(flags.all_pass() && flags.normalized);
        let single = DirectionBase::from_directions(&c, vec![qvec(&[-1, 0])]).unwrap();
        assert!(!certify_base(&single, &w).unwrap().generates_dual);
        assert!(DirectionBase::from_directions(&c, vec![qvec(&[0, 0])]).is_err());
        let fan = DirectionBase::fan(&c, 16).certified(&w).unwrap();
        assert!(fan.certified_flags.unwrap().all_pass());
    }

    #[test]
    fn reconstruct_point_plus_cone() {
        let c = Cone::orthant(2);
        let v = UpperSet::from_halfspaces(&c, vec![Halfspace::new(qvec(&[1, 0]), q(2)), Halfspace::new(qvec(&[0, 1]), q(-1))]).unwrap();
        let f = SetValuedMap::constant(1, v.clone()).unwrap();
        let base = DirectionBase::fan(&c, 2);
        let r = reconstruct(&f, &[q(0)], &base).unwrap();
        assert!(r.as_polyhedron().unwrap().equivalent(v.as_polyhedron().unwrap()));
        let e = SetValuedMap::constant(1, UpperSet::empty(&c)).unwrap();
        assert!(reconstruct(&e, &[q(0)], &base).unwrap().is_empty());
    }

    #[test]
    fn reconstruct_kinked_equals_value() {
        let f = kinked_map();
        let c = f.cone().clone();
        let base = DirectionBase::from_directions(&c, vec![qvec(&[-1, 0]), qvec(&[0, -1]), qvec(&[-1, -1])]).unwrap();
        for xi in -3..=3 {
            let x = vec![q(xi)];
            let r = reconstruct(&f, &x, &base).unwrap();
            let v = f.evaluate(&x).unwrap();
            assert!(r.as_polyhedron().unwrap().equivalent(v.as_polyhedron().unwrap()), "x={xi}");
            let w = Window::cube(2, &q(10));
            assert_eq!(window_gap_exact(&r, &v, &w).unwrap(), Some(q(0)));
        }
    }

    #[test]
    fn parabola_gap_shrinks() {
        let c = Cone::orthant(2);
        let a = UpperSet::oracle(&c, Arc::new(ParabolaSet::new(q(1)))).unwrap();
        let f = SetValuedMap::constant(1, a.clone()).unwrap();
        let w = Window::cube(2, &q(4));
        let coarse = reconstruct(&f, &[q(0)], &DirectionBase::fan(&c, 64)).unwrap();
        let fine = reconstruct(&f, &[q(0)], &DirectionBase::fan(&c, 256)).unwrap();
        let g64 = window_gap(&coarse, &a, &w).unwrap();
        let g256 = window_gap(&fine, &a, &w).unwrap();
        assert!(g256 < g64, "{g256} vs {g64}");
        assert!(g64 > 0.0);
    }

    #[test]
    fn scalarization_struct_uses_closed_form() {
        let f = kinked_map();
        let s = Scalarization::new(&f, &qvec(&[-1, -1])).unwrap();
        assert!(s.closed_form.is_some());
        assert_eq!(s.eval(&[q(1)]).unwrap(), scalarize_eval(&f, &qvec(&[-1, -1]), &[q(1)]).unwrap());
        let g = tilted_map();
        assert!(Scalarization::new(&g, &qvec(&[-1, -1])).unwrap().closed_form.is_none());
    }
}
