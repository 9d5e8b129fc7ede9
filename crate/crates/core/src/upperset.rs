//! Elements of the lattice of upper closed sets `{A : A = cl(A + C)}`,
//! ordered by reverse inclusion.

use std::any::Any;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::cone::Cone;
use crate::dd::project;
use crate::error::{check_dim, Error, Result};
use crate::lp::Halfspace;
use crate::oracle::{ParabolaSet, ScaledSet, SumSet, SupportFn};
use crate::polyhedron::{Polyhedron, Window};
use crate::rational::{add_vec, dot, fmt_q, norm1, scale_vec, unit, zeros, ExtQ, Q};

/// Number of fan directions used for oracle comparisons in the plane.
pub const DEFAULT_FAN: usize = 64;

#[derive(Clone, Debug)]
pub enum Repr {
    /// Closed union of upper closed polyhedra; no pieces means the empty set.
    Polyhedral(Vec<Polyhedron>),
    Oracle(Arc<dyn SupportFn>),
}

#[derive(Clone, Debug)]
pub struct UpperSet {
    cone: Cone,
    rep: Repr,
}

/// Result of an order test; `certified == false` means the answer rests on
/// a finite direction or sample grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderResult {
    pub leq: bool,
    pub certified: bool,
}

/// Outcome of a containment test `A ⊆ B + εB∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum Containment {
    Holds,
    /// A point of `A` (or a recession direction of `A`, flagged) outside the enlargement.
    FailsAt { point: Vec<Q>, is_direction: bool },
    /// A direction `y` with `σ_A(y) > σ_B(y) + ε‖y‖₁`.
    FailsSupport { direction: Vec<Q>, lhs: ExtQ, rhs: ExtQ },
    Unknown,
}

impl Containment {
    pub fn fails(&self) -> bool {
        matches!(self, Containment::FailsAt { .. } | Containment::FailsSupport { .. })
    }
}

/// A single polyhedron seen through its support function.
#[derive(Clone, Debug)]
struct PolySet(Polyhedron);

impl SupportFn for PolySet {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn support(&self, y: &[Q]) -> ExtQ {
        self.0.support(y)
    }
    fn contains(&self, z: &[Q]) -> Option<bool> {
        Some(self.0.contains(z))
    }
    fn describe(&self) -> String {
        format!("polyhedron({} rows)", self.0.rows().len())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn is_upper_closed(p: &Polyhedron, c: &Cone) -> bool {
    p.is_empty() || c.generators().iter().all(|g| p.rows().iter().all(|h| !dot(&h.normal, g).is_negative()))
}

impl UpperSet {
    pub fn empty(c: &Cone) -> UpperSet {
        UpperSet { cone: c.clone(), rep: Repr::Polyhedral(Vec::new()) }
    }

    pub fn universe(c: &Cone) -> UpperSet {
        UpperSet { cone: c.clone(), rep: Repr::Polyhedral(vec![Polyhedron::universe(c.dim())]) }
    }

    /// An upper closed polyhedron; rejects `P` with `P + C ≠ P`.
    pub fn from_polyhedron(c: &Cone, p: Polyhedron) -> Result<UpperSet> {
        Self::from_union(c, vec![p])
    }

    pub fn from_union(c: &Cone, pieces: Vec<Polyhedron>) -> Result<UpperSet> {
        let mut kept = Vec::new();
        for p in pieces {
            check_dim(c.dim(), p.dim())?;
            if p.is_empty() {
                continue;
            }
            if !is_upper_closed(&p, c) {
                return Err(Error::Malformed("polyhedron is not upper closed for the cone".into()));
            }
            kept.push(p);
        }
        Ok(UpperSet { cone: c.clone(), rep: Repr::Polyhedral(kept) })
    }

    pub fn from_halfspaces(c: &Cone, rows: Vec<Halfspace>) -> Result<UpperSet> {
        Self::from_polyhedron(c, Polyhedron::new(c.dim(), rows)?)
    }

    pub fn oracle(c: &Cone, f: Arc<dyn SupportFn>) -> Result<UpperSet> {
        check_dim(c.dim(), f.dim())?;
        Ok(UpperSet { cone: c.clone(), rep: Repr::Oracle(f) })
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn repr(&self) -> &Repr {
        &self.rep
    }

    pub fn pieces(&self) -> Option<&[Polyhedron]> {
        match &self.rep {
            Repr::Polyhedral(p) => Some(p),
            Repr::Oracle(_) => None,
        }
    }

    /// The single polyhedron of a convex polyhedral value (`None` for empty
    /// sets, unions and oracles).
    pub fn as_polyhedron(&self) -> Option<&Polyhedron> {
        match self.pieces() {
            Some([p]) => Some(p),
            _ => None,
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        matches!(self.rep, Repr::Polyhedral(_))
    }

    pub fn is_empty(&self) -> bool {
        match &self.rep {
            Repr::Polyhedral(p) => p.is_empty(),
            Repr::Oracle(f) => self.cone.dual_rays().iter().all(|y| f.support(y) == ExtQ::NegInf),
        }
    }

    pub fn is_universe(&self) -> bool {
        match &self.rep {
            Repr::Polyhedral(p) => p.iter().any(|q| q.reduced().rows().is_empty()),
            Repr::Oracle(_) => false,
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.rep {
            Repr::Polyhedral(p) => p.len() <= 1,
            Repr::Oracle(_) => true,
        }
    }

    /// `sup{y·z : z ∈ A}`.
    pub fn support(&self, y: &[Q]) -> ExtQ {
        match &self.rep {
            Repr::Polyhedral(p) => p.iter().map(|q| q.support(y)).max().unwrap_or(ExtQ::NegInf),
            Repr::Oracle(f) => f.support(y),
        }
    }

    /// Exact membership when the representation allows it.
    pub fn contains_exact(&self, z: &[Q]) -> Option<bool> {
        match &self.rep {
            Repr::Polyhedral(p) => Some(p.iter().any(|q| q.contains(z))),
            Repr::Oracle(f) => f.contains(z),
        }
    }

    /// Membership; exact for polyhedral sets, outer-approximate on the
    /// default direction fan (with slack `tol`) for oracle sets.
    pub fn member(&self, z: &[Q], tol: &Q) -> Result<bool> {
        check_dim(self.dim(), z.len())?;
        match &self.rep {
            Repr::Polyhedral(p) => Ok(p.iter().any(|q| q.contains(z))),
            Repr::Oracle(f) => Ok(self.cone.dual_fan(DEFAULT_FAN).iter().all(|y| match f.support(y) {
                ExtQ::PosInf => true,
                ExtQ::NegInf => false,
                ExtQ::Fin(s) => dot(y, z) <= s + tol,
            })),
        }
    }

    /// Whether the set has nonempty interior.
    pub fn has_interior(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        match &self.rep {
            Repr::Polyhedral(p) => self.cone.has_interior() || p.iter().any(|q| q.interior_ball().is_some()),
            Repr::Oracle(_) => self.cone.has_interior(),
        }
    }

    /// Whether the orthant is part of the ordering cone, which makes box
    /// tests reducible to corner membership.
    fn cone_has_orthant(&self) -> bool {
        (0..self.dim()).all(|i| self.cone.contains(&unit(self.dim(), i)))
    }

    /// Whether the set meets the box; `None` when undecidable exactly.
    pub fn meets_box(&self, w: &Window) -> Option<bool> {
        match &self.rep {
            Repr::Polyhedral(p) => Some(p.iter().any(|q| q.meet_box(w).is_some())),
            Repr::Oracle(f) if self.cone_has_orthant() => f.contains(&w.hi),
            Repr::Oracle(_) => None,
        }
    }

    /// Whether the box lies inside the set; `None` when undecidable exactly.
    pub fn box_inside(&self, w: &Window) -> Option<bool> {
        match &self.rep {
            Repr::Polyhedral(p) => {
                if p.iter().any(|q| w.corners().iter().all(|c| q.contains(c))) {
                    return Some(true);
                }
                if p.len() <= 1 {
                    return Some(false);
                }
                if w.corners().iter().any(|c| !p.iter().any(|q| q.contains(c))) {
                    return Some(false);
                }
                None
            }
            Repr::Oracle(f) if self.cone_has_orthant() => f.contains(&w.lo),
            Repr::Oracle(_) => None,
        }
    }

    /// Exact max-norm distance from `z` (polyhedral sets only).
    pub fn distance_inf(&self, z: &[Q]) -> Option<Q> {
        match &self.rep {
            Repr::Polyhedral(p) => p.iter().filter_map(|q| q.dist_inf(z).map(|d| d.0)).min(),
            Repr::Oracle(_) => None,
        }
    }

    pub fn translate(&self, v: &[Q]) -> UpperSet {
        let rep = match &self.rep {
            Repr::Polyhedral(p) => Repr::Polyhedral(p.iter().map(|q| q.translate(v)).collect()),
            Repr::Oracle(f) => {
                let shift = PolySet(Polyhedron::point(v));
                Repr::Oracle(Arc::new(SumSet { parts: vec![f.clone(), Arc::new(shift)] }))
            }
        };
        UpperSet { cone: self.cone.clone(), rep }
    }

    fn as_support_fn(&self) -> Result<Arc<dyn SupportFn>> {
        match &self.rep {
            Repr::Oracle(f) => Ok(f.clone()),
            Repr::Polyhedral(p) if p.len() == 1 => Ok(Arc::new(PolySet(p[0].clone()))),
            Repr::Polyhedral(_) => Err(Error::NonConvexOperand("union of polyhedra".into())),
        }
    }

    /// `self ⊆ other + eps·B∞`. Polyhedral pairs are decided exactly when
    /// `other` is convex; otherwise support values on `directions` can only
    /// refute the inclusion.
    pub fn within_enlargement(&self, other: &UpperSet, eps: &Q, directions: &[Vec<Q>]) -> Containment {
        if self.is_empty() {
            return Containment::Holds;
        }
        if let (Repr::Polyhedral(a), Repr::Polyhedral(b)) = (&self.rep, &other.rep) {
            if b.is_empty() {
                let p = a[0].vrep().points[0].clone();
                return Containment::FailsAt { point: p, is_direction: false };
            }
            if b.len() == 1 {
                for p in a {
                    if let Err((w, is_direction)) = p.within_enlargement(&b[0], eps) {
                        return Containment::FailsAt { point: w, is_direction };
                    }
                }
                return Containment::Holds;
            }
            // union on the right: a piece inside one enlarged member is fine;
            // a vertex far from every member refutes
            let mut all = true;
            for p in a {
                if b.iter().any(|q| p.within_enlargement(q, eps).is_ok()) {
                    continue;
                }
                all = false;
                for v in &p.vrep().points {
                    let far = b.iter().all(|q| q.dist_inf(v).is_none_or(|(d, _)| d > *eps));
                    if far {
                        return Containment::FailsAt { point: v.clone(), is_direction: false };
                    }
                }
            }
            return if all { Containment::Holds } else { Containment::Unknown };
        }
        if let (Repr::Oracle(fa), Repr::Oracle(fb)) = (&self.rep, &other.rep) {
            if fb.contains_set(fa.as_ref()) == Some(true) {
                return Containment::Holds;
            }
        }
        // exact for a polyhedral right-hand side at eps = 0: compare along its normals
        if let (Some(q), true) = (other.as_polyhedron(), eps.is_zero()) {
            for h in q.rows() {
                let y: Vec<Q> = h.normal.iter().map(|v| -v).collect();
                let lhs = self.support(&y);
                let rhs = ExtQ::Fin(-h.offset.clone());
                if lhs > rhs {
                    return Containment::FailsSupport { direction: y, lhs, rhs };
                }
            }
            return Containment::Holds;
        }
        for y in directions {
            let lhs = self.support(y);
            let rhs = other.support(y).add_q(&(eps * norm1(y)));
            if lhs > rhs {
                return Containment::FailsSupport { direction: y.clone(), lhs, rhs };
            }
        }
        Containment::Unknown
    }
}

/// `cl(P + C)`, computed by eliminating the cone multipliers.
pub fn upper_closure(p: &Polyhedron, c: &Cone) -> Result<UpperSet> {
    check_dim(c.dim(), p.dim())?;
    if p.is_empty() {
        return Ok(UpperSet::empty(c));
    }
    let m = c.dim();
    let gens = c.generators();
    let k = gens.len();
    // z = p + Gλ, λ ≥ 0: substitute p = z − Gλ into P's rows, eliminate λ
    let mut rows = Vec::new();
    for h in p.rows() {
        let mut n = h.normal.clone();
        for g in gens {
            n.push(-dot(&h.normal, g));
        }
        rows.push(Halfspace::new(n, h.offset.clone()));
    }
    for j in 0..k {
        rows.push(Halfspace::new(unit(m + k, m + j), Q::zero()));
    }
    let projected = project(&rows, m + k, m);
    UpperSet::from_polyhedron(c, Polyhedron::new(m, projected)?)
}

fn same_cone(sets: &[UpperSet]) -> Result<Cone> {
    let c = &sets.first().ok_or(Error::EmptyFamily)?.cone;
    for s in sets {
        if !s.cone.equivalent(c) {
            return Err(Error::ConeMismatch);
        }
    }
    Ok(c.clone())
}

/// `A ≼_C B`, i.e. `B ⊆ A`.
pub fn set_order_leq(a: &UpperSet, b: &UpperSet) -> Result<OrderResult> {
    same_cone(&[a.clone(), b.clone()])?;
    let certain = |leq| Ok(OrderResult { leq, certified: true });
    if b.is_empty() || a.is_universe() {
        return certain(true);
    }
    if a.is_empty() {
        return certain(false);
    }
    match (&a.rep, &b.rep) {
        (Repr::Polyhedral(pa), Repr::Polyhedral(pb)) => {
            let mut certified = true;
            for p in pb {
                if pa.iter().any(|q| q.contains_polyhedron(p)) {
                    continue;
                }
                if pa.len() == 1 {
                    return certain(false);
                }
                // b's piece against a union: look for an uncovered sample point
                let v = p.vrep();
                let mut samples = v.points.clone();
                for (i, x) in v.points.iter().enumerate() {
                    for d in &v.directions {
                        samples.push(add_vec(x, d));
                    }
                    for y in &v.points[i + 1..] {
                        samples.push(scale_vec(&add_vec(x, y), &Q::new(1.into(), 2.into())));
                    }
                }
                if samples.iter().any(|z| !pa.iter().any(|q| q.contains(z))) {
                    return certain(false);
                }
                certified = false;
            }
            Ok(OrderResult { leq: true, certified })
        }
        (Repr::Polyhedral(_), Repr::Oracle(_)) if a.is_convex() => {
            let c = b.within_enlargement(a, &Q::zero(), &[]);
            certain(c == Containment::Holds)
        }
        (Repr::Oracle(fa), Repr::Oracle(fb)) => {
            if let Some(r) = fa.contains_set(fb.as_ref()) {
                return certain(r);
            }
            grid_order(a, b)
        }
        (Repr::Oracle(fa), Repr::Polyhedral(pb)) => {
            let mut exact = true;
            for p in pb {
                let v = p.vrep();
                for x in &v.points {
                    match fa.contains(x) {
                        Some(false) => return certain(false),
                        Some(true) => {}
                        None => exact = false,
                    }
                }
                if v.directions.iter().any(|d| !a.cone.contains(d)) {
                    exact = false;
                }
            }
            if exact {
                certain(true)
            } else {
                grid_order(a, b)
            }
        }
        _ => grid_order(a, b),
    }
}

fn grid_order(a: &UpperSet, b: &UpperSet) -> Result<OrderResult> {
    let fan = a.cone.dual_fan(DEFAULT_FAN);
    let violated = fan.iter().any(|y| b.support(y) > a.support(y));
    Ok(OrderResult { leq: !violated, certified: violated })
}

/// Closed union of the family.
pub fn lattice_inf(sets: &[UpperSet]) -> Result<UpperSet> {
    let c = same_cone(sets)?;
    let nonempty: Vec<&UpperSet> = sets.iter().filter(|s| !s.is_empty()).collect();
    if nonempty.is_empty() {
        return Ok(UpperSet::empty(&c));
    }
    if nonempty.len() == 1 {
        return Ok(nonempty[0].clone());
    }
    let mut pieces = Vec::new();
    for s in nonempty {
        match &s.rep {
            Repr::Polyhedral(p) => pieces.extend(p.iter().cloned()),
            Repr::Oracle(_) => return Err(Error::Unsupported("union with a support-oracle set".into())),
        }
    }
    UpperSet::from_union(&c, pieces)
}

/// Intersection of the family (convex operands).
pub fn lattice_sup(sets: &[UpperSet]) -> Result<UpperSet> {
    let c = same_cone(sets)?;
    if sets.iter().any(|s| s.is_empty()) {
        return Ok(UpperSet::empty(&c));
    }
    let proper: Vec<&UpperSet> = sets.iter().filter(|s| !s.is_universe()).collect();
    if proper.is_empty() {
        return Ok(UpperSet::universe(&c));
    }
    if proper.len() == 1 {
        return Ok(proper[0].clone());
    }
    let mut rows = Vec::new();
    for s in proper {
        match &s.rep {
            Repr::Polyhedral(p) if p.len() == 1 => rows.extend(p[0].rows().iter().cloned()),
            Repr::Polyhedral(_) => return Err(Error::NonConvexOperand("union of polyhedra".into())),
            Repr::Oracle(_) => return Err(Error::Unsupported("intersection with a support-oracle set".into())),
        }
    }
    UpperSet::from_polyhedron(&c, Polyhedron::new(c.dim(), rows)?)
}

pub fn minkowski_sum(a: &UpperSet, b: &UpperSet) -> Result<UpperSet> {
    let c = same_cone(&[a.clone(), b.clone()])?;
    if a.is_empty() || b.is_empty() {
        return Ok(UpperSet::empty(&c));
    }
    if a.is_universe() || b.is_universe() {
        return Ok(UpperSet::universe(&c));
    }
    match (a.as_polyhedron(), b.as_polyhedron()) {
        (Some(p), Some(q)) => UpperSet::from_polyhedron(&c, p.minkowski_sum(q)?),
        _ => {
            let parts = vec![a.as_support_fn()?, b.as_support_fn()?];
            UpperSet::oracle(&c, Arc::new(SumSet { parts }))
        }
    }
}

/// `tA`, with `0·A = C` for nonempty `A`.
pub fn scale(a: &UpperSet, t: &Q) -> Result<UpperSet> {
    if t.is_negative() {
        return Err(Error::NegativeScale(fmt_q(t)));
    }
    if a.is_empty() {
        return Ok(a.clone());
    }
    if t.is_zero() {
        return Ok(embed_point(&zeros(a.dim()), &a.cone));
    }
    if t.is_one() {
        return Ok(a.clone());
    }
    let rep = match &a.rep {
        Repr::Polyhedral(p) => Repr::Polyhedral(p.iter().map(|q| q.scale(t)).collect()),
        Repr::Oracle(f) => match f.as_any().downcast_ref::<ParabolaSet>() {
            Some(par) => Repr::Oracle(Arc::new(ParabolaSet::new(&par.scale * t))),
            None => Repr::Oracle(Arc::new(ScaledSet { inner: f.clone(), factor: t.clone() })),
        },
    };
    Ok(UpperSet { cone: a.cone.clone(), rep })
}

/// `{z} + C`.
pub fn embed_point(z: &[Q], c: &Cone) -> UpperSet {
    let p = Polyhedron::from_rows(c.dim(), c.rows()).translate(z);
    UpperSet { cone: c.clone(), rep: Repr::Polyhedral(vec![p]) }
}
