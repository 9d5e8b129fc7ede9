//! Closed convex polyhedra in H-representation with a lazily computed
//! V-representation.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::dd::{cone_generators, project, reduce_rows};
use crate::error::{check_dim, Result};
use crate::lp::{maximize, Halfspace, LpOutcome};
use crate::rational::{dot, neg_vec, norm1, unit, zeros, ExtQ, Q};

/// Points and directions with `P = conv(points) + cone(directions)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VRep {
    pub points: Vec<Vec<Q>>,
    pub directions: Vec<Vec<Q>>,
}

/// `{z : n_i·z ≥ b_i for all i}`; the representation need not be minimal.
#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
    vrep: Arc<OnceLock<VRep>>,
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polyhedron")
            .field("dim", &self.dim)
            .field("rows", &self.rows)
            .finish()
    }
}

/// Axis-aligned box `[lo, hi]`, used as a sampling window and as the
/// closed ball of the max-norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

impl Window {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        Ok(Window { lo, hi })
    }

    pub fn cube(dim: usize, radius: &Q) -> Self {
        Window { lo: vec![-radius.clone(); dim], hi: vec![radius.clone(); dim] }
    }

    pub fn ball(center: &[Q], radius: &Q) -> Self {
        Window {
            lo: center.iter().map(|c| c - radius).collect(),
            hi: center.iter().map(|c| c + radius).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    pub fn rows(&self) -> Vec<Halfspace> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            out.push(Halfspace::new(unit(d, i), self.lo[i].clone()));
            out.push(Halfspace::new(neg_vec(&unit(d, i)), -self.hi[i].clone()));
        }
        out
    }

    pub fn contains(&self, z: &[Q]) -> bool {
        z.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }

    pub fn corners(&self) -> Vec<Vec<Q>> {
        let d = self.dim();
        (0..(1usize << d))
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i].clone() } else { self.lo[i].clone() })
                    .collect()
            })
            .collect()
    }

    pub fn as_polyhedron(&self) -> Polyhedron {
        Polyhedron::from_rows(self.dim(), self.rows())
    }
}

impl Polyhedron {
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        for r in &rows {
            check_dim(dim, r.dim())?;
        }
        Ok(Self::from_rows(dim, rows))
    }

    pub(crate) fn from_rows(dim: usize, rows: Vec<Halfspace>) -> Self {
        Polyhedron { dim, rows, vrep: Arc::new(OnceLock::new()) }
    }

    pub fn universe(dim: usize) -> Self {
        Self::from_rows(dim, Vec::new())
    }

    pub fn empty(dim: usize) -> Self {
        Self::from_rows(dim, vec![Halfspace::new(zeros(dim), Q::one())])
    }

    pub fn point(p: &[Q]) -> Self {
        let d = p.len();
        let mut rows = Vec::with_capacity(2 * d);
        for i in 0..d {
            rows.push(Halfspace::new(unit(d, i), p[i].clone()));
            rows.push(Halfspace::new(neg_vec(&unit(d, i)), -p[i].clone()));
        }
        Self::from_rows(d, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn contains(&self, z: &[Q]) -> bool {
        self.rows.iter().all(|h| h.contains(z))
    }

    pub fn vrep(&self) -> &VRep {
        self.vrep.get_or_init(|| {
            // homogenize: (z, t) with n·z − b t ≥ 0, t ≥ 0
            let d = self.dim;
            let mut cons: Vec<Vec<Q>> = self
                .rows
                .iter()
                .map(|h| {
                    let mut v = h.normal.clone();
                    v.push(-h.offset.clone());
                    v
                })
                .collect();
            let mut t = zeros(d + 1);
            t[d] = Q::one();
            cons.push(t);
            let gens = cone_generators(&cons, d + 1);
            let mut points = Vec::new();
            let mut directions = Vec::new();
            for g in gens {
                let t = &g[d];
                if t.is_zero() {
                    directions.push(g[..d].to_vec());
                } else {
                    points.push(g[..d].iter().map(|x| x / t).collect());
                }
            }
            if points.is_empty() {
                directions.clear();
            }
            VRep { points, directions }
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vrep().points.is_empty()
    }

    /// `sup{y·z : z ∈ P}` from the V-representation.
    pub fn support(&self, y: &[Q]) -> ExtQ {
        let v = self.vrep();
        if v.points.is_empty() {
            return ExtQ::NegInf;
        }
        if v.directions.iter().any(|d| dot(y, d).is_positive()) {
            return ExtQ::PosInf;
        }
        ExtQ::Fin(v.points.iter().map(|p| dot(y, p)).max().expect("nonempty"))
    }

    /// `sup{y·z : z ∈ P}` by the simplex method.
    pub fn support_lp(&self, y: &[Q]) -> ExtQ {
        match maximize(y, &self.rows) {
            LpOutcome::Optimal { value, .. } => ExtQ::Fin(value),
            LpOutcome::Unbounded => ExtQ::PosInf,
            LpOutcome::Infeasible => ExtQ::NegInf,
        }
    }

    /// A maximizer of `y·z` over P, when the supremum is attained.
    pub fn argmax(&self, y: &[Q]) -> Option<Vec<Q>> {
        let v = self.vrep();
        if v.directions.iter().any(|d| dot(y, d).is_positive()) {
            return None;
        }
        v.points.iter().max_by(|a, b| dot(y, a).cmp(&dot(y, b))).cloned()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim, other.dim)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self::from_rows(self.dim, rows))
    }

    pub fn with_rows(&self, extra: &[Halfspace]) -> Polyhedron {
        let mut rows = self.rows.clone();
        rows.extend(extra.iter().cloned());
        Self::from_rows(self.dim, rows)
    }

    pub fn clip(&self, w: &Window) -> Polyhedron {
        self.with_rows(&w.rows())
    }

    pub fn translate(&self, v: &[Q]) -> Polyhedron {
        let rows = self
            .rows
            .iter()
            .map(|h| Halfspace::new(h.normal.clone(), &h.offset + dot(&h.normal, v)))
            .collect();
        Self::from_rows(self.dim, rows)
    }

    /// `tP` for `t > 0`.
    pub fn scale(&self, t: &Q) -> Polyhedron {
        debug_assert!(t.is_positive());
        let rows = self.rows.iter().map(|h| Halfspace::new(h.normal.clone(), &h.offset * t)).collect();
        Self::from_rows(self.dim, rows)
    }

    /// Minimal H-representation (redundant rows removed).
    pub fn reduced(&self) -> Polyhedron {
        Self::from_rows(self.dim, reduce_rows(self.dim, &self.rows))
    }

    /// Exact test of `other ⊆ self`.
    pub fn contains_polyhedron(&self, other: &Polyhedron) -> bool {
        let v = other.vrep();
        if v.points.is_empty() {
            return true;
        }
        v.points.iter().all(|p| self.contains(p))
            && v.directions.iter().all(|d| self.rows.iter().all(|h| !dot(&h.normal, d).is_negative()))
    }

    pub fn equivalent(&self, other: &Polyhedron) -> bool {
        self.contains_polyhedron(other) && other.contains_polyhedron(self)
    }

    /// Whether P meets the box; the returned point is a witness.
    pub fn meet_box(&self, w: &Window) -> Option<Vec<Q>> {
        let mut probes = w.corners();
        probes.push((0..self.dim).map(|i| (&w.lo[i] + &w.hi[i]) / Q::from_integer(2.into())).collect());
        if let Some(p) = probes.into_iter().find(|p| self.contains(p)) {
            return Some(p);
        }
        // a single row may already separate
        for h in &self.rows {
            let top = (0..self.dim).fold(Q::zero(), |acc, i| {
                let n = &h.normal[i];
                acc + if n.is_positive() { n * &w.hi[i] } else { n * &w.lo[i] }
            });
            if top < h.offset {
                return None;
            }
        }
        crate::lp::feasible_point(self.dim, &self.clip(w).rows)
    }

    /// Max-norm distance from z to P (`None` for empty P), with a nearest point.
    pub fn dist_inf(&self, z: &[Q]) -> Option<(Q, Vec<Q>)> {
        let d = self.dim;
        // variables (p, s): p ∈ P, −s ≤ z_i − p_i ≤ s; maximize −s
        let mut rows: Vec<Halfspace> = self
            .rows
            .iter()
            .map(|h| {
                let mut n = h.normal.clone();
                n.push(Q::zero());
                Halfspace::new(n, h.offset.clone())
            })
            .collect();
        for i in 0..d {
            // s + p_i ≥ z_i  and  s − p_i ≥ −z_i
            let mut a = zeros(d + 1);
            a[i] = Q::one();
            a[d] = Q::one();
            rows.push(Halfspace::new(a, z[i].clone()));
            let mut b = zeros(d + 1);
            b[i] = -Q::one();
            b[d] = Q::one();
            rows.push(Halfspace::new(b, -z[i].clone()));
        }
        let mut obj = zeros(d + 1);
        obj[d] = -Q::one();
        match maximize(&obj, &rows) {
            LpOutcome::Optimal { value, point } => Some((-value, point[..d].to_vec())),
            _ => None,
        }
    }

    /// Exact test of `self ⊆ other + eps·B∞`; on failure returns a point of
    /// `self` (or a direction, flagged by `true`) outside the enlargement.
    pub fn within_enlargement(&self, other: &Polyhedron, eps: &Q) -> std::result::Result<(), (Vec<Q>, bool)> {
        let v = self.vrep();
        if v.points.is_empty() {
            return Ok(());
        }
        if other.is_empty() {
            return Err((v.points[0].clone(), false));
        }
        for d in &v.directions {
            if other.rows.iter().any(|h| dot(&h.normal, d).is_negative()) {
                return Err((d.clone(), true));
            }
        }
        for p in &v.points {
            match other.dist_inf(p) {
                Some((dist, _)) if dist <= *eps => {}
                _ => return Err((p.clone(), false)),
            }
        }
        Ok(())
    }

    /// `P + R` by projecting `{(z, p) : p ∈ P, z − p ∈ R}`.
    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim, other.dim)?;
        if self.is_empty() || other.is_empty() {
            return Ok(Self::empty(self.dim));
        }
        let d = self.dim;
        let mut rows = Vec::new();
        for h in &self.rows {
            let mut n = zeros(d);
            n.extend(h.normal.iter().cloned());
            rows.push(Halfspace::new(n, h.offset.clone()));
        }
        for h in &other.rows {
            let mut n = h.normal.clone();
            n.extend(neg_vec(&h.normal));
            rows.push(Halfspace::new(n, h.offset.clone()));
        }
        Ok(Self::from_rows(d, project(&rows, 2 * d, d)))
    }

    /// The largest r such that some max-norm ball of radius r (capped at 1)
    /// fits in P, together with its center; `None` when P has empty interior.
    pub fn interior_ball(&self) -> Option<(Vec<Q>, Q)> {
        let d = self.dim;
        let mut rows: Vec<Halfspace> = self
            .rows
            .iter()
            .map(|h| {
                let mut n = h.normal.clone();
                n.push(-norm1(&h.normal));
                Halfspace::new(n, h.offset.clone())
            })
            .collect();
        let mut cap = zeros(d + 1);
        cap[d] = -Q::one();
        rows.push(Halfspace::new(cap, -Q::one()));
        let mut obj = zeros(d + 1);
        obj[d] = Q::one();
        match maximize(&obj, &rows) {
            LpOutcome::Optimal { value, point } if value.is_positive() => Some((point[..d].to_vec(), value)),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.vrep().directions.is_empty()
    }
}

/// Support value of a polyhedron in direction `zstar` by exact LP.
pub fn support_value(p: &Polyhedron, zstar: &[Q]) -> Result<ExtQ> {
    check_dim(p.dim(), zstar.len())?;
    Ok(p.support_lp(zstar))
}

/// Exact LP `max objective·z` over `p`.
pub fn lp_solve(objective: &[Q], p: &Polyhedron) -> Result<LpOutcome> {
    check_dim(p.dim(), objective.len())?;
    Ok(maximize(objective, p.rows()))
}
