//! Piecewise-linear extended-real functions, their conjugates, and the
//! negative conjugate of a set-valued map computed along two routes.

use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::lp::{maximize, Halfspace, LpOutcome};
use crate::polyhedron::Polyhedron;
use crate::rational::{dot, sub_vec, to_f64, zeros, ExtQ, Q};
use crate::scalarize::{closed_form, s_map};
use crate::setmap::SetValuedMap;
use crate::upperset::{minkowski_sum, UpperSet};

/// `x ↦ slope·x + constant` on a polyhedral region.
#[derive(Clone, Debug)]
pub struct Piece {
    pub region: Polyhedron,
    pub slope: Vec<Q>,
    pub constant: Q,
}

/// The pointwise maximum of finitely many affine functions on a polyhedral
/// domain; `+∞` off the domain, `−∞` on it when there are no affine parts.
#[derive(Clone, Debug)]
pub struct MaxAffine {
    pub domain: Polyhedron,
    pub affines: Vec<(Vec<Q>, Q)>,
}

/// A function `R^n → Q ∪ {±∞}` given by affine pieces on polyhedral regions,
/// `−∞` on `minus_inf` and `+∞` wherever no region applies.
#[derive(Clone, Debug)]
pub struct PiecewiseLinearFn {
    pub dim: usize,
    pub pieces: Vec<Piece>,
    pub minus_inf: Vec<Polyhedron>,
    /// max-affine form, when the function was built as one
    pub max_affine: Option<MaxAffine>,
}

impl PiecewiseLinearFn {
    /// Splits a max-affine function into the regions where each part is maximal.
    pub fn from_max_affine(domain: Polyhedron, affines: Vec<(Vec<Q>, Q)>) -> Result<Self> {
        let n = domain.dim();
        for (a, _) in &affines {
            check_dim(n, a.len())?;
        }
        let form = MaxAffine { domain: domain.clone(), affines: affines.clone() };
        if domain.is_empty() {
            return Ok(PiecewiseLinearFn { dim: n, pieces: vec![], minus_inf: vec![], max_affine: Some(form) });
        }
        if affines.is_empty() {
            return Ok(PiecewiseLinearFn { dim: n, pieces: vec![], minus_inf: vec![domain], max_affine: Some(form) });
        }
        let mut pieces = Vec::new();
        for (i, (a, c)) in affines.iter().enumerate() {
            // a·x + c ≥ b·x + d for every other part
            let extra: Vec<Halfspace> = affines
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (b, d))| Halfspace::new(sub_vec(a, b), d - c))
                .collect();
            let region = domain.with_rows(&extra);
            if !region.is_empty() {
                pieces.push(Piece { region, slope: a.clone(), constant: c.clone() });
            }
        }
        Ok(PiecewiseLinearFn { dim: n, pieces, minus_inf: vec![], max_affine: Some(form) })
    }

    /// The constant function `v` on all of `R^n`.
    pub fn constant(n: usize, v: ExtQ) -> Self {
        let all = Polyhedron::universe(n);
        match v {
            ExtQ::Fin(c) => Self::from_max_affine(all, vec![(zeros(n), c)]).expect("dimensions agree"),
            ExtQ::NegInf => Self::from_max_affine(all, vec![]).expect("dimensions agree"),
            ExtQ::PosInf => Self::from_max_affine(Polyhedron::empty(n), vec![]).expect("dimensions agree"),
        }
    }

    pub fn eval(&self, x: &[Q]) -> ExtQ {
        if self.minus_inf.iter().any(|p| p.contains(x)) {
            return ExtQ::NegInf;
        }
        self.pieces
            .iter()
            .filter(|p| p.region.contains(x))
            .map(|p| ExtQ::Fin(dot(&p.slope, x) + &p.constant))
            .max()
            .unwrap_or(ExtQ::PosInf)
    }

    /// Never `−∞` and finite somewhere.
    pub fn is_proper(&self) -> bool {
        self.minus_inf.iter().all(|p| p.is_empty()) && !self.pieces.is_empty()
    }

    pub fn is_improper_minus(&self) -> bool {
        self.minus_inf.iter().any(|p| !p.is_empty())
    }
}

/// `φ*(x*) = sup_x {x*·x − φ(x)}`, one LP per piece.
pub fn scalar_conjugate(phi: &PiecewiseLinearFn, xstar: &[Q]) -> Result<ExtQ> {
    check_dim(phi.dim, xstar.len())?;
    if phi.is_improper_minus() {
        return Ok(ExtQ::PosInf);
    }
    let mut best = ExtQ::NegInf;
    for p in &phi.pieces {
        let obj = sub_vec(xstar, &p.slope);
        let v = match maximize(&obj, p.region.rows()) {
            LpOutcome::Optimal { value, .. } => ExtQ::Fin(value - &p.constant),
            LpOutcome::Unbounded => ExtQ::PosInf,
            LpOutcome::Infeasible => ExtQ::NegInf,
        };
        best = best.max(v);
    }
    Ok(best)
}

/// The conjugate of a max-affine function as a max-affine function, read off
/// the vertices and recession directions of the epigraph.
pub fn conjugate_function(phi: &PiecewiseLinearFn) -> Result<PiecewiseLinearFn> {
    let form = phi
        .max_affine
        .as_ref()
        .ok_or_else(|| Error::Unsupported("conjugate of a function without max-affine form".into()))?;
    let n = phi.dim;
    if form.domain.is_empty() {
        return Ok(PiecewiseLinearFn::constant(n, ExtQ::NegInf));
    }
    if form.affines.is_empty() {
        return Ok(PiecewiseLinearFn::constant(n, ExtQ::PosInf));
    }
    // epi φ = {(x, t) : x ∈ dom, t ≥ a·x + c}
    let mut rows: Vec<Halfspace> = form
        .domain
        .rows()
        .iter()
        .map(|h| {
            let mut v = h.normal.clone();
            v.push(Q::zero());
            Halfspace::new(v, h.offset.clone())
        })
        .collect();
    for (a, c) in &form.affines {
        let mut v: Vec<Q> = a.iter().map(|x| -x).collect();
        v.push(Q::one());
        rows.push(Halfspace::new(v, c.clone()));
    }
    let epi = Polyhedron::new(n + 1, rows)?;
    let vrep = epi.vrep();
    // φ*(x*) = max over vertices (y, t) of x*·y − t, finite iff x*·d ≤ s for every
    // recession direction (d, s)
    let domain_rows = vrep
        .directions
        .iter()
        .map(|d| {
            let v: Vec<Q> = d[..n].iter().map(|x| -x).collect();
            Halfspace::new(v, -d[n].clone())
        })
        .collect();
    let affines = vrep.points.iter().map(|p| (p[..n].to_vec(), -p[n].clone())).collect();
    PiecewiseLinearFn::from_max_affine(Polyhedron::new(n, domain_rows)?, affines)
}

/// `(−f*)(x*, z*)` as a halfspace, Z or ∅.
#[derive(Clone, Debug)]
pub struct NegConjugateValue {
    pub xstar: Vec<Q>,
    pub zstar: Vec<Q>,
    /// `t` with value `{z : z*·z ≤ t}`
    pub threshold: ExtQ,
    pub value: UpperSet,
}

fn halfspace_value(f: &SetValuedMap, zstar: &[Q], t: &ExtQ) -> Result<UpperSet> {
    let c = f.cone();
    match t {
        ExtQ::PosInf => Ok(UpperSet::universe(c)),
        ExtQ::NegInf => Ok(UpperSet::empty(c)),
        ExtQ::Fin(v) => {
            let n: Vec<Q> = zstar.iter().map(|x| -x).collect();
            UpperSet::from_halfspaces(c, vec![Halfspace::new(n, -v.clone())])
        }
    }
}

/// `{z : −φ*(x*) ≤ −z*·z}` with `φ = φ_{(f,z*)}` in closed form.
pub fn neg_conjugate_scalar_route(f: &SetValuedMap, xstar: &[Q], zstar: &[Q]) -> Result<NegConjugateValue> {
    f.cone().check_direction(zstar)?;
    check_dim(f.domain_dim(), xstar.len())?;
    let phi = closed_form(f, zstar)?;
    let threshold = scalar_conjugate(&phi, xstar)?;
    let value = halfspace_value(f, zstar, &threshold)?;
    Ok(NegConjugateValue { xstar: xstar.to_vec(), zstar: zstar.to_vec(), threshold, value })
}

/// Nested dyadic grid on `[−radius, radius]^n` with `2^{⌈r/n⌉} + 1` points per axis.
pub fn dyadic_grid(n: usize, level: u32, radius: i64) -> Vec<Vec<Q>> {
    let per_axis_log = level.div_ceil(n.max(1) as u32);
    let steps = 1i64 << per_axis_log;
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * (steps as usize + 1));
        for p in &out {
            for i in 0..=steps {
                let mut v = p.clone();
                v.push(Q::new((-radius * steps + 2 * radius * i).into(), steps.into()));
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Result of the grid route: the union of `f(x) + S(−x)` over the grid is
/// the halfspace `{z : z*·z ≤ threshold}`.
#[derive(Clone, Debug)]
pub struct DirectConjugate {
    pub threshold: ExtQ,
    pub value: UpperSet,
    pub grid_points: usize,
}

/// `cl ∪_{x ∈ grid} (f(x) + S_{(x*,z*)}(−x))`, each summand formed as a
/// Minkowski sum.
pub fn neg_conjugate_direct(f: &SetValuedMap, xstar: &[Q], zstar: &[Q], grid: &[Vec<Q>]) -> Result<DirectConjugate> {
    f.cone().check_direction(zstar)?;
    check_dim(f.domain_dim(), xstar.len())?;
    let mut threshold = ExtQ::NegInf;
    for x in grid {
        let v = f.evaluate(x)?;
        if v.is_empty() {
            continue;
        }
        let neg_x: Vec<Q> = x.iter().map(|a| -a).collect();
        let s = s_map(xstar, zstar, &neg_x, f.cone())?;
        let sum = minkowski_sum(&v, &s)?;
        // the sum is a translate of the halfspace S, or all of Z
        let t = sum.support(zstar);
        threshold = threshold.max(t);
        if threshold == ExtQ::PosInf {
            break;
        }
    }
    let value = halfspace_value(f, zstar, &threshold)?;
    Ok(DirectConjugate { threshold, value, grid_points: grid.len() })
}

/// Max-norm Hausdorff distance between two parallel halfspaces `{z*·z ≤ s}`,
/// `{z*·z ≤ t}`; infinite when exactly one side is Z or ∅.
pub fn threshold_gap(zstar: &[Q], s: &ExtQ, t: &ExtQ) -> f64 {
    match (s, t) {
        (ExtQ::Fin(a), ExtQ::Fin(b)) => {
            let n1: Q = zstar.iter().fold(Q::zero(), |acc, v| acc + num_traits::Signed::abs(v));
            to_f64(&(num_traits::Signed::abs(&(a - b)) / n1))
        }
        _ if s == t => 0.0,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::rational::{q, qr, qvec};
    use crate::rational::unit;
    use crate::upperset::embed_point;

    fn abs_fn() -> PiecewiseLinearFn {
        PiecewiseLinearFn::from_max_affine(
            Polyhedron::universe(1),
            vec![(unit(1, 0), Q::zero()), (vec![-Q::one()], Q::zero())],
        )
        .unwrap()
    }

    /// sup of x*·x − |x| over a coarse grid of [−50, 50].
    fn brute_abs_conj(xs: i64) -> i64 {
        (-50..=50).map(|x| xs * x - x.abs()).max().unwrap()
    }

    #[test]
    fn conjugate_of_abs() {
        let phi = abs_fn();
        assert_eq!(scalar_conjugate(&phi, &qvec(&[0])).unwrap(), ExtQ::Fin(q(0)));
        assert_eq!(brute_abs_conj(0), 0);
        assert_eq!(scalar_conjugate(&phi, &qvec(&[2])).unwrap(), ExtQ::PosInf);
        // the grid sup grows with the grid for |x*| > 1
        assert_eq!(brute_abs_conj(2), 50);
        assert_eq!(scalar_conjugate(&phi, &qvec(&[1])).unwrap(), ExtQ::Fin(q(0)));
        assert_eq!(scalar_conjugate(&phi, &[qr(-1, 2)]).unwrap(), ExtQ::Fin(q(0)));
    }

    #[test]
    fn conjugate_of_zero_and_improper() {
        let zero = PiecewiseLinearFn::constant(1, ExtQ::Fin(q(0)));
        assert_eq!(scalar_conjugate(&zero, &qvec(&[0])).unwrap(), ExtQ::Fin(q(0)));
        let bad = PiecewiseLinearFn::constant(1, ExtQ::NegInf);
        assert_eq!(scalar_conjugate(&bad, &qvec(&[3])).unwrap(), ExtQ::PosInf);
        let top = PiecewiseLinearFn::constant(1, ExtQ::PosInf);
        assert_eq!(scalar_conjugate(&top, &qvec(&[3])).unwrap(), ExtQ::NegInf);
    }

    #[test]
    fn conjugate_function_of_abs_is_indicator() {
        let cj = conjugate_function(&abs_fn()).unwrap();
        assert_eq!(cj.eval(&[qr(1, 2)]), ExtQ::Fin(q(0)));
        assert_eq!(cj.eval(&qvec(&[1])), ExtQ::Fin(q(0)));
        assert_eq!(cj.eval(&qvec(&[2])), ExtQ::PosInf);
        let bi = conjugate_function(&cj).unwrap();
        for x in -4..=4 {
            assert_eq!(bi.eval(&qvec(&[x])), ExtQ::Fin(q(x.abs())));
        }
    }

    #[test]
    fn routes_on_constant_orthant() {
        let c = Cone::orthant(2);
        let f = SetValuedMap::constant(1, embed_point(&qvec(&[0, 0]), &c)).unwrap();
        let zs = qvec(&[-1, -1]);
        let s = neg_conjugate_scalar_route(&f, &qvec(&[0]), &zs).unwrap();
        assert_eq!(s.threshold, ExtQ::Fin(q(0)));
        // value {z : 0 ≤ z1 + z2}
        assert!(s.value.contains_exact(&qvec(&[1, -1])).unwrap());
        assert!(!s.value.contains_exact(&qvec(&[-1, 0])).unwrap());
        let d = neg_conjugate_direct(&f, &qvec(&[0]), &zs, &dyadic_grid(1, 4, 4)).unwrap();
        assert_eq!(d.threshold, s.threshold);
    }

    #[test]
    fn empty_and_improper_maps() {
        let c = Cone::orthant(2);
        let f = SetValuedMap::constant(1, UpperSet::empty(&c)).unwrap();
        let v = neg_conjugate_scalar_route(&f, &qvec(&[0]), &qvec(&[-1, -1])).unwrap();
        assert!(v.value.is_empty());
        // a halfplane whose normal differs from z* makes φ ≡ −∞
        let g = SetValuedMap::affine(1, &c, vec![qvec(&[1, 1])], vec![q(0)], vec![qvec(&[0])]).unwrap();
        let v = neg_conjugate_scalar_route(&g, &qvec(&[0]), &qvec(&[-1, 0])).unwrap();
        assert!(v.value.is_universe());
    }

    #[test]
    fn single_point_grid() {
        let c = Cone::orthant(2);
        let f = SetValuedMap::affine(1, &c, vec![qvec(&[1, 1])], vec![q(0)], vec![qvec(&[1])]).unwrap();
        let (xs, zs) = (qvec(&[1]), qvec(&[-1, -1]));
        let d = neg_conjugate_direct(&f, &xs, &zs, &[qvec(&[2])]).unwrap();
        // f(2) + S(−2) = {z1 + z2 ≥ 2} + {−z1 − z2 ≤ 2}
        let sum = minkowski_sum(&f.evaluate(&qvec(&[2])).unwrap(), &s_map(&xs, &zs, &qvec(&[-2]), &c).unwrap()).unwrap();
        assert_eq!(d.threshold, sum.support(&zs));
        assert_eq!(d.threshold, ExtQ::Fin(q(0)));
    }

    #[test]
    fn grids_are_nested() {
        let a = dyadic_grid(2, 4, 8);
        let b = dyadic_grid(2, 6, 8);
        assert_eq!(a.len(), 25);
        assert!(a.iter().all(|p| b.contains(p)));
    }
}
