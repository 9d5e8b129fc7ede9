//! Point-wise checkers for the semicontinuity notions of maps into upper
//! sets, the verdict matrix, and validation of the implications between them.
//!
//! Every checker looks at the finest few neighbourhood levels `δ_k = δ0·ρ^k`
//! around `x0`. A level is *violated* when some probe point breaks the
//! defining condition, which is always decided by exact arithmetic. A notion
//! fails when one of its conditions is violated at every examined level, and
//! holds when every condition is clean at every examined level.

use std::fmt;

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::lp::{feasible_point, maximize, Halfspace, LpOutcome};
use crate::polyhedron::Window;
use crate::rational::{fmt_q, q, qr, unit, zeros, ExtQ, Q};
use crate::scalarize::{certify_base, DirectionBase};
use crate::setmap::SetValuedMap;
use crate::upperset::{Containment, Repr, UpperSet};
use crate::verdict::{Status, Verdict, Witness};

/// Neighbourhood grids and tolerances shared by all checkers.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckerConfig {
    pub delta0: Q,
    pub rho: Q,
    /// finest level `K`
    pub levels: usize,
    /// number of finest levels that must agree
    pub agree: usize,
    pub z_radii: Vec<Q>,
    pub fan: usize,
    pub tol: Q,
    pub window_radius: Q,
    /// cap on sampled points of a value (and twice that outside it)
    pub z_samples: usize,
}

impl Default for CheckerConfig {
    fn default() -> Self {
        CheckerConfig {
            delta0: q(1),
            rho: qr(1, 2),
            levels: 12,
            agree: 3,
            z_radii: vec![q(1), qr(1, 4), qr(1, 16)],
            fan: 64,
            tol: qr(1, 1_000_000_000),
            window_radius: q(10),
            z_samples: 8,
        }
    }
}

impl CheckerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Malformed(format!("checker config: {m}")));
        if !self.delta0.is_positive() {
            return bad("delta0 must be positive");
        }
        if !self.rho.is_positive() || self.rho >= Q::one() {
            return bad("rho must lie in (0, 1)");
        }
        if self.levels < 1 {
            return bad("at least one level");
        }
        if self.agree < 1 || self.agree > self.levels + 1 {
            return bad("agree must lie in 1..=levels+1");
        }
        if self.z_radii.is_empty() || self.z_radii.iter().any(|r| !r.is_positive()) {
            return bad("z radii must be positive");
        }
        if self.tol.is_negative() {
            return bad("tol must be nonnegative");
        }
        if !self.window_radius.is_positive() {
            return bad("window radius must be positive");
        }
        Ok(())
    }

    pub fn delta(&self, k: usize) -> Q {
        let mut d = self.delta0.clone();
        for _ in 0..k {
            d *= &self.rho;
        }
        d
    }

    pub fn window(&self, m: usize) -> Window {
        Window::cube(m, &self.window_radius)
    }

    fn examined_levels(&self) -> std::ops::RangeInclusive<usize> {
        (self.levels + 1 - self.agree)..=self.levels
    }

    fn min_radius(&self) -> Q {
        self.z_radii.iter().min().cloned().expect("validated")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "delta0": fmt_q(&self.delta0),
            "rho": fmt_q(&self.rho),
            "levels": self.levels,
            "agree": self.agree,
            "z_radii": self.z_radii.iter().map(fmt_q).collect::<Vec<_>>(),
            "fan": self.fan,
            "tol": fmt_q(&self.tol),
            "window_radius": fmt_q(&self.window_radius),
            "z_samples": self.z_samples,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Usc,
    Lsc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Uc,
    Lc,
    Huc,
    Hlc,
    Eff,
    Lba,
    Lls,
    Uls,
    CminusUsc,
    CminusLsc,
    UniformUsc,
    UniformLsc,
    GraphInterior,
}

impl Concept {
    pub const ALL: [Concept; 13] = [
        Concept::Uc,
        Concept::Lc,
        Concept::Huc,
        Concept::Hlc,
        Concept::Eff,
        Concept::Lba,
        Concept::Lls,
        Concept::Uls,
        Concept::CminusUsc,
        Concept::CminusLsc,
        Concept::UniformUsc,
        Concept::UniformLsc,
        Concept::GraphInterior,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Concept::Uc => "uc",
            Concept::Lc => "lc",
            Concept::Huc => "huc",
            Concept::Hlc => "hlc",
            Concept::Eff => "eff",
            Concept::Lba => "lba",
            Concept::Lls => "lls",
            Concept::Uls => "uls",
            Concept::CminusUsc => "cminus_usc",
            Concept::CminusLsc => "cminus_lsc",
            Concept::UniformUsc => "uniform_usc",
            Concept::UniformLsc => "uniform_lsc",
            Concept::GraphInterior => "graph_interior",
        }
    }

    pub fn from_name(s: &str) -> Option<Concept> {
        Concept::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// probing

struct Level {
    delta: Q,
    points: Vec<(Vec<Q>, UpperSet)>,
    /// support directions: the fan plus near-ray refinement tied to the level
    directions: Vec<Vec<Q>>,
}

struct Probe {
    x0: Vec<Q>,
    v0: UpperSet,
    cone: Cone,
    window: Window,
    levels: Vec<Level>,
    resolution: usize,
}

fn neighbours(x0: &[Q], delta: &Q) -> Vec<Vec<Q>> {
    let n = x0.len();
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut x = x0.to_vec();
            x[i] += delta * q(s);
            out.push(x);
        }
    }
    if (2..=3).contains(&n) {
        for mask in 0..(1usize << n) {
            let x = (0..n)
                .map(|i| if mask >> i & 1 == 1 { &x0[i] + delta } else { &x0[i] - delta })
                .collect();
            out.push(x);
        }
    }
    out
}

fn near_ray_depth(k: usize) -> u32 {
    2 * k as u32 + 4
}

fn probe(f: &SetValuedMap, x0: &[Q], cfg: &CheckerConfig) -> Result<Probe> {
    cfg.validate()?;
    check_dim(f.domain_dim(), x0.len())?;
    let cone = f.cone().clone();
    let fan = cone.dual_fan(cfg.fan);
    let v0 = f.evaluate(x0)?;
    let mut levels = Vec::new();
    for k in cfg.examined_levels() {
        let delta = cfg.delta(k);
        let points = neighbours(x0, &delta)
            .into_iter()
            .map(|x| f.evaluate(&x).map(|v| (x, v)))
            .collect::<Result<Vec<_>>>()?;
        let mut directions = fan.clone();
        for d in cone.dual_near_rays(near_ray_depth(k)) {
            if !directions.contains(&d) {
                directions.push(d);
            }
        }
        levels.push(Level { delta, points, directions });
    }
    Ok(Probe {
        x0: x0.to_vec(),
        v0,
        window: cfg.window(cone.dim()),
        cone,
        levels,
        resolution: cfg.levels,
    })
}

enum Outcome {
    Clean,
    Violated(Witness),
    Unknown(String),
}

/// Verdict for one condition from its outcomes on the examined levels.
fn decide(outs: Vec<Outcome>, resolution: usize) -> Verdict {
    if outs.iter().all(|o| matches!(o, Outcome::Clean)) {
        return Verdict::holds(resolution, None);
    }
    if outs.iter().all(|o| matches!(o, Outcome::Violated(_))) {
        let w = outs.into_iter().last().and_then(|o| match o {
            Outcome::Violated(w) => Some(w),
            _ => None,
        });
        return Verdict::fails(resolution, w.expect("nonempty"));
    }
    let why = outs
        .iter()
        .find_map(|o| match o {
            Outcome::Unknown(s) => Some(s.clone()),
            _ => None,
        })
        .unwrap_or_else(|| "violated at some examined levels only".into());
    Verdict::inconclusive(resolution, why)
}

/// All conditions must hold; any failing one fails the notion.
fn all_of(vs: impl IntoIterator<Item = Verdict>, resolution: usize) -> Verdict {
    let mut pending = None;
    for v in vs {
        match v.status {
            Status::Fails => return v,
            Status::Inconclusive => {
                pending.get_or_insert(v);
            }
            Status::Holds => {}
        }
    }
    pending.unwrap_or_else(|| Verdict::holds(resolution, None))
}

/// Some candidate must work.
fn any_of(vs: impl IntoIterator<Item = Verdict>, resolution: usize, none: &str) -> Verdict {
    let mut pending = None;
    let mut last_fail = None;
    for v in vs {
        match v.status {
            Status::Holds => return v,
            Status::Inconclusive => {
                pending.get_or_insert(v);
            }
            Status::Fails => last_fail = Some(v),
        }
    }
    pending
        .or(last_fail)
        .unwrap_or_else(|| Verdict::fails(resolution, Witness::note(none)))
}

fn at(x: &[Q], z: Option<&[Q]>, radius: Option<&Q>, detail: impl Into<String>) -> Witness {
    Witness {
        x: Some(x.to_vec()),
        z: z.map(|z| z.to_vec()),
        radius: radius.cloned(),
        direction: None,
        detail: detail.into(),
    }
}

fn cone_has_orthant(c: &Cone) -> bool {
    (0..c.dim()).all(|i| c.contains(&unit(c.dim(), i)))
}

fn is_oracle(v: &UpperSet) -> bool {
    matches!(v.repr(), Repr::Oracle(_))
}

// ---------------------------------------------------------------------------
// sample points in Z

fn spread<T: Clone>(items: Vec<T>, cap: usize) -> Vec<T> {
    if items.len() <= cap || cap == 0 {
        return items;
    }
    (0..cap).map(|i| items[i * items.len() / cap].clone()).collect()
}

fn lattice(w: &Window, per_axis: i64) -> Vec<Vec<Q>> {
    let mut out = vec![vec![]];
    for i in 0..w.dim() {
        let step = (&w.hi[i] - &w.lo[i]) / q(per_axis);
        let mut next = Vec::new();
        for p in &out {
            for j in 0..=per_axis {
                let mut v: Vec<Q> = p.clone();
                v.push(&w.lo[i] + &step * q(j));
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Points of `v`: vertices of its pieces inside the window, a feasible point
/// of each piece, or boundary lattice points for an oracle.
fn member_samples(v: &UpperSet, w: &Window, cap: usize) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    match v.repr() {
        Repr::Polyhedral(pieces) => {
            for p in pieces {
                let clipped = p.clip(w);
                let mut pts = clipped.vrep().points.clone();
                if pts.is_empty() {
                    pts.extend(feasible_point(p.dim(), p.rows()));
                }
                for z in pts {
                    if !out.contains(&z) {
                        out.push(z);
                    }
                }
            }
        }
        Repr::Oracle(_) => {
            let per_axis = 10;
            for z in lattice(w, per_axis) {
                if v.contains_exact(&z) != Some(true) {
                    continue;
                }
                let on_boundary = (0..z.len()).any(|i| {
                    let step = (&w.hi[i] - &w.lo[i]) / q(per_axis);
                    let mut y = z.clone();
                    y[i] -= step;
                    v.contains_exact(&y) == Some(false)
                });
                if on_boundary {
                    out.push(z);
                }
            }
        }
    }
    spread(out, cap)
}

/// Points outside `v` with a radius `r` such that the closed ball of radius
/// `2r` misses `v` and `r` exceeds the smallest z-radius.
fn outside_samples(v: &UpperSet, w: &Window, members: &[Vec<Q>], cfg: &CheckerConfig) -> Vec<(Vec<Q>, Q)> {
    let floor = cfg.min_radius() * q(4);
    let mut cands = lattice(w, 4);
    let half = qr(1, 2);
    for m in members {
        let shifted: Vec<Q> = m.iter().map(|c| c - &half).collect();
        cands.push(shifted);
        for i in 0..m.len() {
            let mut y = m.clone();
            y[i] -= &half;
            cands.push(y);
        }
    }
    let mut out: Vec<(Vec<Q>, Q)> = Vec::new();
    for z in cands {
        if v.contains_exact(&z) != Some(false) || out.iter().any(|(p, _)| p == &z) {
            continue;
        }
        let gap = match (v.repr(), v.distance_inf(&z)) {
            (Repr::Polyhedral(p), _) if p.is_empty() => Some(q(2) * &cfg.window_radius),
            (Repr::Polyhedral(_), d) => d,
            (Repr::Oracle(_), _) => {
                // largest dyadic radius whose box misses the set
                let mut r = floor.clone();
                let mut good = None;
                while r <= q(4) * &cfg.window_radius {
                    match v.meets_box(&Window::ball(&z, &r)) {
                        Some(false) => good = Some(r.clone()),
                        _ => break,
                    }
                    r *= q(2);
                }
                // meeting is monotone in r, so the box of radius `good` misses
                // and the distance exceeds it
                good.map(|g| g + qr(1, 1_000_000))
            }
        };
        if let Some(d) = gap {
            if d > floor {
                out.push((z, d / q(2)));
            }
        }
    }
    spread(out, 2 * cfg.z_samples)
}

// ---------------------------------------------------------------------------
// individual checks on a probe

fn enlargement_check(p: &Probe, cfg: &CheckerConfig, upper: bool) -> Verdict {
    let per_eps = cfg.z_radii.iter().map(|eps| {
        let outs = p
            .levels
            .iter()
            .map(|lvl| {
                let mut unknown = None;
                for (x, v) in &lvl.points {
                    let (small, big) = if upper { (v, &p.v0) } else { (&p.v0, v) };
                    match small.within_enlargement(big, eps, &lvl.directions) {
                        Containment::Holds => {}
                        Containment::FailsAt { point, is_direction } => {
                            let mut w = at(x, None, Some(eps), "");
                            if is_direction {
                                w.direction = Some(point);
                                w.detail = "recession direction escapes the enlargement".into();
                            } else {
                                w.z = Some(point);
                                w.detail = "point outside the enlargement".into();
                            }
                            return Outcome::Violated(w);
                        }
                        Containment::FailsSupport { direction, lhs, rhs } => {
                            let mut w = at(x, None, Some(eps), format!("support {} exceeds {}", lhs.label(), rhs.label()));
                            w.direction = Some(direction);
                            return Outcome::Violated(w);
                        }
                        Containment::Unknown => {
                            // supports on the level's directions are the resolution for oracle sets
                            if !(is_oracle(small) || is_oracle(big)) {
                                unknown = Some("containment in a union undecided".to_string());
                            }
                        }
                    }
                }
                unknown.map_or(Outcome::Clean, Outcome::Unknown)
            })
            .collect();
        decide(outs, p.resolution)
    });
    all_of(per_eps.collect::<Vec<_>>(), p.resolution)
}

fn lc_check(p: &Probe, cfg: &CheckerConfig, members: &[Vec<Q>]) -> Verdict {
    if p.v0.is_empty() {
        return Verdict::holds(p.resolution, Some(Witness::note("x0 outside the domain")));
    }
    let mut vs = Vec::new();
    for z0 in members {
        for eps in &cfg.z_radii {
            let ball = Window::ball(z0, eps);
            let outs = p
                .levels
                .iter()
                .map(|lvl| {
                    for (x, v) in &lvl.points {
                        match v.meets_box(&ball) {
                            Some(true) => {}
                            Some(false) => {
                                return Outcome::Violated(at(x, Some(z0), Some(eps), "value misses the ball around z"))
                            }
                            None => return Outcome::Unknown("ball meeting undecided".into()),
                        }
                    }
                    Outcome::Clean
                })
                .collect();
            vs.push(decide(outs, p.resolution));
        }
    }
    all_of(vs, p.resolution)
}

/// A point common to all sets, inside the box when given: `Some(None)` when
/// there is provably none, `None` when undecided.
fn common_point(sets: &[&UpperSet], bx: Option<&Window>, cone: &Cone, cfg: &CheckerConfig) -> Option<Option<Vec<Q>>> {
    if sets.iter().any(|v| v.is_empty()) {
        return Some(None);
    }
    let m = cone.dim();
    let orthant = cone_has_orthant(cone);
    if let (Some(b), true) = (bx, orthant) {
        // upper sets meet a box exactly when they contain its top corner
        for v in sets {
            match v.contains_exact(&b.hi) {
                Some(true) => {}
                Some(false) => return Some(None),
                None => return None,
            }
        }
        return Some(Some(b.hi.clone()));
    }
    let singles: Option<Vec<_>> = sets.iter().map(|v| v.as_polyhedron()).collect();
    if let Some(ps) = singles {
        // vertices of one set that already lie in all the others
        let in_box = |z: &[Q]| bx.is_none_or(|b| b.contains(z));
        for p in &ps {
            for z in &p.vrep().points {
                if in_box(z) && ps.iter().all(|o| o.contains(z)) {
                    return Some(Some(z.clone()));
                }
            }
        }
        let mut rows: Vec<Halfspace> = ps.iter().flat_map(|p| p.rows().iter().cloned()).collect();
        if let Some(b) = bx {
            rows.extend(b.rows());
        }
        return Some(feasible_point(m, &rows));
    }
    if bx.is_none() && orthant {
        let mut s = cfg.window_radius.clone();
        for _ in 0..4 {
            let cand = vec![s.clone(); m];
            if sets.iter().all(|v| v.contains_exact(&cand) == Some(true)) {
                return Some(Some(cand));
            }
            s *= q(10);
        }
    }
    None
}

fn level_sets<'a>(p: &'a Probe, lvl: &'a Level) -> Vec<&'a UpperSet> {
    let mut sets: Vec<&UpperSet> = lvl.points.iter().map(|(_, v)| v).collect();
    sets.push(&p.v0);
    sets
}

fn uls_check(p: &Probe, cfg: &CheckerConfig, members: &[Vec<Q>]) -> Verdict {
    if p.v0.is_empty() {
        return Verdict::holds(p.resolution, Some(Witness::note("x0 outside the domain")));
    }
    let mut vs = Vec::new();
    for z0 in members {
        for eps in &cfg.z_radii {
            let ball = Window::ball(z0, eps);
            let outs = p
                .levels
                .iter()
                .map(|lvl| match common_point(&level_sets(p, lvl), Some(&ball), &p.cone, cfg) {
                    Some(Some(_)) => Outcome::Clean,
                    Some(None) => Outcome::Violated(Witness {
                        x: None,
                        z: Some(z0.clone()),
                        radius: Some(eps.clone()),
                        direction: None,
                        detail: format!("no common member near z over the radius-{} neighbourhood", fmt_q(&lvl.delta)),
                    }),
                    None => Outcome::Unknown("common member undecided".into()),
                })
                .collect();
            vs.push(decide(outs, p.resolution));
        }
    }
    all_of(vs, p.resolution)
}

fn lba_check(p: &Probe, cfg: &CheckerConfig) -> Verdict {
    let mut found = None;
    let outs = p
        .levels
        .iter()
        .map(|lvl| match common_point(&level_sets(p, lvl), None, &p.cone, cfg) {
            Some(Some(a)) => {
                found = Some(a);
                Outcome::Clean
            }
            Some(None) => Outcome::Violated(Witness::note(format!(
                "no common member over the radius-{} neighbourhood",
                fmt_q(&lvl.delta)
            ))),
            None => Outcome::Unknown("common member undecided".into()),
        })
        .collect();
    let mut v = decide(outs, p.resolution);
    if v.status == Status::Holds {
        v.witness = Some(Witness { z: found, detail: "common member".into(), ..Default::default() });
    }
    v
}

fn eff_check(p: &Probe, members: &[Vec<Q>]) -> Verdict {
    let mut boxes: Vec<Window> = members.iter().take(3).map(|z| Window::ball(z, &Q::one())).collect();
    boxes.push(p.window.clone());
    let per_box = boxes.iter().map(|bx| {
        let outs = p
            .levels
            .iter()
            .map(|lvl| {
                let mut pts: Vec<(&[Q], &UpperSet)> = lvl.points.iter().map(|(x, v)| (x.as_slice(), v)).collect();
                pts.push((&p.x0, &p.v0));
                for (x, v) in pts {
                    match v.meets_box(bx) {
                        Some(true) => {}
                        Some(false) => {
                            let mut w = at(x, None, None, "value misses the candidate bounded set");
                            w.z = Some(bx.lo.clone());
                            return Outcome::Violated(w);
                        }
                        None => return Outcome::Unknown("box meeting undecided".into()),
                    }
                }
                Outcome::Clean
            })
            .collect();
        decide(outs, p.resolution)
    });
    any_of(per_box.collect::<Vec<_>>(), p.resolution, "no candidate bounded set")
}

fn lls_check(p: &Probe, cfg: &CheckerConfig, outside: &[(Vec<Q>, Q)]) -> Verdict {
    let mut vs = Vec::new();
    for (z0, eps) in outside {
        let ball = Window::ball(z0, eps);
        let outs = p
            .levels
            .iter()
            .map(|lvl| {
                for (x, v) in &lvl.points {
                    match v.meets_box(&ball) {
                        Some(false) => {}
                        Some(true) => {
                            return Outcome::Violated(at(x, Some(z0), Some(eps), "nearby value reaches the ball around z"))
                        }
                        None => return Outcome::Unknown("ball meeting undecided".into()),
                    }
                }
                Outcome::Clean
            })
            .collect();
        vs.push(decide(outs, p.resolution));
    }
    let _ = cfg;
    all_of(vs, p.resolution)
}

fn scalar_violation(mode: Mode, phi0: &ExtQ, phi: &ExtQ, eps: &Q) -> bool {
    match (mode, phi0) {
        (Mode::Usc, ExtQ::PosInf) | (Mode::Lsc, ExtQ::NegInf) => false,
        (Mode::Usc, ExtQ::Fin(a)) => *phi > ExtQ::Fin(a + eps),
        (Mode::Usc, ExtQ::NegInf) => *phi > ExtQ::Fin(-(Q::one() / eps)),
        (Mode::Lsc, ExtQ::Fin(a)) => *phi < ExtQ::Fin(a - eps),
        (Mode::Lsc, ExtQ::PosInf) => *phi < ExtQ::Fin(Q::one() / eps),
    }
}

fn scalar_outcome(p: &Probe, lvl: &Level, dirs: &[Vec<Q>], mode: Mode, eps: &Q) -> Outcome {
    for zstar in dirs {
        let phi0 = -p.v0.support(zstar);
        for (x, v) in &lvl.points {
            let phi = -v.support(zstar);
            if scalar_violation(mode, &phi0, &phi, eps) {
                let mut w = at(x, None, Some(eps), format!("scalarization {} against {} at x0", phi.label(), phi0.label()));
                w.direction = Some(zstar.clone());
                return Outcome::Violated(w);
            }
        }
    }
    Outcome::Clean
}

fn scalar_check(p: &Probe, cfg: &CheckerConfig, base: &DirectionBase, mode: Mode) -> Verdict {
    let mut vs = Vec::new();
    for zstar in &base.directions {
        for eps in &cfg.z_radii {
            let outs = p
                .levels
                .iter()
                .map(|lvl| scalar_outcome(p, lvl, std::slice::from_ref(zstar), mode, eps))
                .collect();
            vs.push(decide(outs, p.resolution));
        }
    }
    all_of(vs, p.resolution)
}

fn base_ok(base: &DirectionBase, window: &Window) -> Result<bool> {
    match &base.certified_flags {
        Some(flags) => Ok(flags.all_pass()),
        None => Ok(certify_base(base, window)?.all_pass()),
    }
}

fn uniform_check(p: &Probe, cfg: &CheckerConfig, base: &DirectionBase, base_ok: bool, mode: Mode) -> Verdict {
    if !base_ok {
        return Verdict::inconclusive(p.resolution, "direction base fails the base conditions");
    }
    let vs = cfg.z_radii.iter().map(|eps| {
        let outs = p
            .levels
            .iter()
            .map(|lvl| {
                // the base refined toward the extreme rays as the level shrinks
                let mut dirs = base.directions.clone();
                for d in &lvl.directions {
                    if !dirs.contains(d) {
                        dirs.push(d.clone());
                    }
                }
                scalar_outcome(p, lvl, &dirs, mode, eps)
            })
            .collect();
        decide(outs, p.resolution)
    });
    all_of(vs.collect::<Vec<_>>(), p.resolution)
}

/// A point `z` with `(x0, z)` in the interior of the graph of a map with
/// fixed normals, or `None` when there is none.
pub fn graph_interior_witness(f: &SetValuedMap, x0: &[Q]) -> Result<Option<Vec<Q>>> {
    check_dim(f.domain_dim(), x0.len())?;
    let a = f
        .fixed_affine()
        .ok_or_else(|| Error::Unsupported("graph interior needs an affine body with fixed normals".into()))?;
    let m = f.image_dim();
    // maximize s subject to N z ≥ q + L x0 + s·1 and s ≤ 1
    let mut rows: Vec<Halfspace> = a
        .value_rows(x0)
        .into_iter()
        .map(|h| {
            let mut n = h.normal;
            n.push(-Q::one());
            Halfspace::new(n, h.offset)
        })
        .collect();
    let mut cap = zeros(m + 1);
    cap[m] = -Q::one();
    rows.push(Halfspace::new(cap, -Q::one()));
    let mut obj = zeros(m + 1);
    obj[m] = Q::one();
    Ok(match maximize(&obj, &rows) {
        LpOutcome::Optimal { value, point } if value.is_positive() => Some(point[..m].to_vec()),
        _ => None,
    })
}

fn graph_interior_check(f: &SetValuedMap, p: &Probe, cfg: &CheckerConfig) -> Result<Verdict> {
    if f.fixed_affine().is_some() {
        return Ok(match graph_interior_witness(f, &p.x0)? {
            Some(z) => Verdict::holds(p.resolution, Some(Witness { z: Some(z), detail: "interior graph point".into(), ..Default::default() })),
            None => Verdict::fails(p.resolution, at(&p.x0, None, None, "graph rows cannot all be strict at x0")),
        });
    }
    if p.v0.is_empty() {
        return Ok(Verdict::fails(p.resolution, at(&p.x0, None, None, "x0 outside the domain")));
    }
    if !p.v0.has_interior() {
        return Ok(Verdict::fails(p.resolution, at(&p.x0, None, None, "value at x0 has empty interior")));
    }
    let r = cfg.min_radius();
    let mut found = None;
    let outs = p
        .levels
        .iter()
        .map(|lvl| {
            if let Some((x, _)) = lvl.points.iter().find(|(_, v)| v.is_empty()) {
                return Outcome::Violated(at(x, None, None, "empty value next to x0"));
            }
            let sets = level_sets(p, lvl);
            let mut s = cfg.window_radius.clone();
            for _ in 0..4 {
                let bx = Window::ball(&vec![s.clone(); p.cone.dim()], &r);
                if sets.iter().all(|v| v.box_inside(&bx) == Some(true)) {
                    found = Some(bx.hi.iter().map(|c| c - &r).collect::<Vec<Q>>());
                    return Outcome::Clean;
                }
                s *= q(10);
            }
            Outcome::Unknown("no interior graph point among the candidates".into())
        })
        .collect();
    let mut v = decide(outs, p.resolution);
    if v.status == Status::Holds {
        v.witness = Some(Witness { z: found, detail: "interior graph point".into(), ..Default::default() });
    }
    Ok(v)
}

/// Whether some ball around the origin lies in `B − C` for the window box `B`
/// recentred at the origin; `None` for a degenerate window.
pub fn check_bn(c: &Cone, window: &Window) -> Option<bool> {
    check_dim(c.dim(), window.dim()).ok()?;
    if window.is_degenerate() {
        return None;
    }
    let m = c.dim();
    let half: Vec<Q> = (0..m).map(|i| (&window.hi[i] - &window.lo[i]) / q(2)).collect();
    let bx = Window::new(half.iter().map(|h| -h).collect(), half.clone()).ok()?;
    let r = half.iter().min().cloned()?;
    let v = Window::ball(&zeros(m), &r);
    // corner v ∈ B − C iff some b ∈ B has b − v ∈ C
    Some(v.corners().iter().all(|corner| {
        let mut rows = bx.rows();
        for h in c.halfspaces() {
            rows.push(Halfspace::new(h.clone(), crate::rational::dot(h, corner)));
        }
        feasible_point(m, &rows).is_some()
    }))
}

// ---------------------------------------------------------------------------
// public checkers

macro_rules! probe_check {
    ($(#[$doc:meta])* $name:ident, |$p:ident, $cfg:ident| $body:expr) => {
        $(#[$doc])*
        pub fn $name(f: &SetValuedMap, x0: &[Q], cfg: &CheckerConfig) -> Result<Verdict> {
            let $p = probe(f, x0, cfg)?;
            let $cfg = cfg;
            Ok($body)
        }
    };
}

probe_check!(
    /// Upper continuity relative to the open sets `f(x0) + εB°`.
    check_uc,
    |p, cfg| uc_note(enlargement_check(&p, cfg, true))
);
probe_check!(
    /// Lower continuity: nearby values meet every ball around sampled members of `f(x0)`.
    check_lc,
    |p, cfg| lc_check(&p, cfg, &member_samples(&p.v0, &p.window, cfg.z_samples))
);
probe_check!(check_huc, |p, cfg| enlargement_check(&p, cfg, true));
probe_check!(check_hlc, |p, cfg| enlargement_check(&p, cfg, false));
probe_check!(check_eff, |p, cfg| eff_check(&p, &member_samples(&p.v0, &p.window, cfg.z_samples)));
probe_check!(check_lba, |p, cfg| lba_check(&p, cfg));
probe_check!(check_uls, |p, cfg| uls_check(&p, cfg, &member_samples(&p.v0, &p.window, cfg.z_samples)));
probe_check!(check_lls, |p, cfg| {
    let members = member_samples(&p.v0, &p.window, cfg.z_samples);
    lls_check(&p, cfg, &outside_samples(&p.v0, &p.window, &members, cfg))
});

fn uc_note(mut v: Verdict) -> Verdict {
    let note = "relative to the enlargement neighbourhoods f(x0) + eps B";
    match &mut v.witness {
        Some(w) if w.detail.is_empty() => w.detail = note.into(),
        Some(w) => w.detail = format!("{}; {note}", w.detail),
        None => v.witness = Some(Witness::note(note)),
    }
    v
}

/// Semicontinuity of every scalarization in the base directions.
pub fn check_scalar_semicontinuity(
    f: &SetValuedMap,
    x0: &[Q],
    base: &DirectionBase,
    cfg: &CheckerConfig,
    mode: Mode,
) -> Result<Verdict> {
    let p = probe(f, x0, cfg)?;
    Ok(scalar_check(&p, cfg, base, mode))
}

/// One neighbourhood serving all base directions at once, with the base
/// refined toward the extreme rays of `C^−` as the level shrinks.
pub fn check_uniform(f: &SetValuedMap, x0: &[Q], base: &DirectionBase, cfg: &CheckerConfig, mode: Mode) -> Result<Verdict> {
    let p = probe(f, x0, cfg)?;
    let ok = base_ok(base, &p.window)?;
    Ok(uniform_check(&p, cfg, base, ok, mode))
}

pub fn check_graph_interior(f: &SetValuedMap, x0: &[Q], cfg: &CheckerConfig) -> Result<Verdict> {
    let p = probe(f, x0, cfg)?;
    graph_interior_check(f, &p, cfg)
}

// ---------------------------------------------------------------------------
// matrix and implications

/// Side conditions of the implications at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixContext {
    pub convex: bool,
    pub convex_valued: bool,
    pub int_c: bool,
    pub bn: bool,
    pub in_domain: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    pub premises: Vec<Concept>,
    pub conclusion: Concept,
}

impl Violation {
    pub fn describe(&self) -> String {
        let lhs: Vec<&str> = self.premises.iter().map(|c| c.name()).collect();
        format!("({}) {} holds but {} fails", self.rule, lhs.join(" & "), self.conclusion)
    }
}

struct Rule {
    id: &'static str,
    premises: &'static [Concept],
    conclusion: Concept,
    side: fn(&MatrixContext) -> bool,
}

const RULES: &[Rule] = &[
    Rule { id: "a", premises: &[Concept::Uls], conclusion: Concept::Lc, side: |_| true },
    Rule { id: "b", premises: &[Concept::Lc], conclusion: Concept::Uls, side: |c| c.int_c },
    Rule { id: "c", premises: &[Concept::Lba], conclusion: Concept::Uls, side: |c| c.convex },
    Rule { id: "d", premises: &[Concept::Eff], conclusion: Concept::Lc, side: |c| c.convex },
    Rule { id: "e", premises: &[Concept::Lc], conclusion: Concept::Eff, side: |c| c.bn && c.in_domain },
    Rule { id: "f", premises: &[Concept::Huc], conclusion: Concept::Lls, side: |_| true },
    Rule { id: "g", premises: &[Concept::Uls], conclusion: Concept::Lba, side: |c| c.in_domain },
    Rule { id: "h", premises: &[Concept::GraphInterior], conclusion: Concept::Lba, side: |_| true },
    Rule { id: "h", premises: &[Concept::Lba], conclusion: Concept::GraphInterior, side: |c| c.int_c },
    Rule { id: "i", premises: &[Concept::Lc], conclusion: Concept::CminusUsc, side: |_| true },
    Rule { id: "i", premises: &[Concept::Huc], conclusion: Concept::CminusLsc, side: |_| true },
    Rule { id: "j", premises: &[Concept::CminusLsc], conclusion: Concept::Lls, side: |c| c.convex_valued },
    Rule { id: "k", premises: &[Concept::UniformUsc], conclusion: Concept::Lc, side: |c| c.convex_valued },
    Rule { id: "k", premises: &[Concept::UniformLsc], conclusion: Concept::Huc, side: |c| c.convex_valued },
    Rule { id: "l", premises: &[Concept::Lc], conclusion: Concept::Lls, side: |c| c.convex && c.in_domain },
    Rule { id: "uc", premises: &[Concept::Uc], conclusion: Concept::Huc, side: |_| true },
];

#[derive(Clone, Debug)]
pub struct VerdictMatrix {
    pub x0: Vec<Q>,
    pub verdicts: Vec<(Concept, Verdict)>,
    pub context: MatrixContext,
    /// implications broken by the raw verdicts; the offending entries are
    /// downgraded to inconclusive in `verdicts`
    pub violations: Vec<Violation>,
}

impl VerdictMatrix {
    pub fn get(&self, c: Concept) -> &Verdict {
        &self.verdicts.iter().find(|(k, _)| *k == c).expect("every concept is present").1
    }

    pub fn status(&self, c: Concept) -> Status {
        self.get(c).status
    }

    pub fn to_json(&self) -> Value {
        let mut entries = serde_json::Map::new();
        for (c, v) in &self.verdicts {
            entries.insert(c.name().into(), v.to_json());
        }
        json!({
            "x0": crate::rational::fmt_vec(&self.x0),
            "verdicts": entries,
            "context": {
                "convex": self.context.convex,
                "convex_valued": self.context.convex_valued,
                "int_c": self.context.int_c,
                "bn": self.context.bn,
                "in_domain": self.context.in_domain,
            },
            "violations": self.violations.iter().map(|v| v.describe()).collect::<Vec<_>>(),
        })
    }
}

/// Decisive pairs that contradict an implication whose side conditions hold.
pub fn implication_violations(verdicts: &[(Concept, Verdict)], ctx: &MatrixContext) -> Vec<Violation> {
    let status = |c: Concept| verdicts.iter().find(|(k, _)| *k == c).map(|(_, v)| v.status);
    RULES
        .iter()
        .filter(|r| (r.side)(ctx))
        .filter(|r| r.premises.iter().all(|&c| status(c) == Some(Status::Holds)))
        .filter(|r| status(r.conclusion) == Some(Status::Fails))
        .map(|r| Violation { rule: r.id, premises: r.premises.to_vec(), conclusion: r.conclusion })
        .collect()
}

pub fn matrix_context(f: &SetValuedMap, x0: &[Q], cfg: &CheckerConfig) -> Result<MatrixContext> {
    let v0 = f.evaluate(x0)?;
    let c = f.cone();
    Ok(MatrixContext {
        convex: f.structurally_convex(),
        convex_valued: v0.is_convex(),
        int_c: c.has_interior(),
        bn: check_bn(c, &cfg.window(c.dim())).unwrap_or(false),
        in_domain: !v0.is_empty(),
    })
}

/// All checkers at one point, run concurrently and cross-validated.
pub fn verdict_matrix(f: &SetValuedMap, x0: &[Q], cfg: &CheckerConfig, base: &DirectionBase) -> Result<VerdictMatrix> {
    if !f.cone().equivalent(&base.cone) {
        return Err(Error::ConeMismatch);
    }
    let p = probe(f, x0, cfg)?;
    let members = member_samples(&p.v0, &p.window, cfg.z_samples);
    let outside = outside_samples(&p.v0, &p.window, &members, cfg);
    let ok = base_ok(base, &p.window)?;
    let run = |c: Concept| -> Result<Verdict> {
        Ok(match c {
            Concept::Uc => uc_note(enlargement_check(&p, cfg, true)),
            Concept::Huc => enlargement_check(&p, cfg, true),
            Concept::Hlc => enlargement_check(&p, cfg, false),
            Concept::Lc => lc_check(&p, cfg, &members),
            Concept::Eff => eff_check(&p, &members),
            Concept::Lba => lba_check(&p, cfg),
            Concept::Lls => lls_check(&p, cfg, &outside),
            Concept::Uls => uls_check(&p, cfg, &members),
            Concept::CminusUsc => scalar_check(&p, cfg, base, Mode::Usc),
            Concept::CminusLsc => scalar_check(&p, cfg, base, Mode::Lsc),
            Concept::UniformUsc => uniform_check(&p, cfg, base, ok, Mode::Usc),
            Concept::UniformLsc => uniform_check(&p, cfg, base, ok, Mode::Lsc),
            Concept::GraphInterior => graph_interior_check(f, &p, cfg)?,
        })
    };
    let verdicts: Vec<(Concept, Verdict)> = Concept::ALL
        .par_iter()
        .map(|&c| run(c).map(|v| (c, v)))
        .collect::<Result<Vec<_>>>()?;
    let context = matrix_context(f, x0, cfg)?;
    let violations = implication_violations(&verdicts, &context);
    let mut verdicts = verdicts;
    for v in &violations {
        for (c, verdict) in verdicts.iter_mut() {
            if *c == v.conclusion || v.premises.contains(c) {
                *verdict = Verdict::inconclusive(verdict.resolution, format!("downgraded: {}", v.describe()));
            }
        }
    }
    Ok(VerdictMatrix { x0: x0.to_vec(), verdicts, context, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ParabolaSet;
    use crate::rational::qvec;
    use crate::setmap::{AffineFamily, AffineScalar, Body, Guard};
    use crate::upperset::embed_point;
    use std::sync::Arc;

    fn vertical() -> Cone {
        Cone::from_generators(2, vec![qvec(&[0, 1])]).unwrap()
    }

    /// `x ↦ (x, 0) + C` with `C` the upward ray.
    fn sliding_ray() -> SetValuedMap {
        SetValuedMap::affine(1, &vertical(), vec![qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[0, 1])], vec![q(0), q(0), q(0)], vec![
            qvec(&[1]),
            qvec(&[-1]),
            qvec(&[0]),
        ])
        .unwrap()
    }

    /// `C` for `x ≥ 0`, empty otherwise.
    fn switch_on() -> SetValuedMap {
        let c = vertical();
        let body = Body::Piecewise {
            guard: Guard { normal: qvec(&[1]), offset: q(0), strict: false },
            then: Box::new(Body::Constant(embed_point(&qvec(&[0, 0]), &c))),
            otherwise: Box::new(Body::Constant(UpperSet::empty(&c))),
        };
        SetValuedMap::new(1, &c, body).unwrap()
    }

    /// `x·A + R²_+` for the parabola set `A`.
    fn scaled_parabola() -> SetValuedMap {
        let c = Cone::orthant(2);
        let base = UpperSet::oracle(&c, Arc::new(ParabolaSet::new(q(1)))).unwrap();
        let body = Body::ScaledBase { base, alpha: AffineScalar { coeffs: qvec(&[1]), constant: q(0) } };
        SetValuedMap::new(1, &c, body).unwrap()
    }

    fn tilted() -> SetValuedMap {
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

    fn cfg() -> CheckerConfig {
        CheckerConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let mut bad = cfg();
        bad.rho = q(1);
        assert!(bad.validate().is_err());
        let mut bad = cfg();
        bad.z_radii = vec![];
        assert!(bad.validate().is_err());
        assert_eq!(cfg().delta(3), qr(1, 8));
    }

    #[test]
    fn sliding_ray_labels() {
        let f = sliding_ray();
        for x0 in [q(0), q(1), qr(-1, 2)] {
            let x0 = vec![x0];
            assert_eq!(check_hlc(&f, &x0, &cfg()).unwrap().status, Status::Holds);
            assert_eq!(check_lc(&f, &x0, &cfg()).unwrap().status, Status::Holds);
            assert_eq!(check_uls(&f, &x0, &cfg()).unwrap().status, Status::Fails);
            assert_eq!(check_lba(&f, &x0, &cfg()).unwrap().status, Status::Fails);
            assert_eq!(check_eff(&f, &x0, &cfg()).unwrap().status, Status::Holds);
        }
    }

    #[test]
    fn switch_on_labels() {
        let f = switch_on();
        let x0 = qvec(&[0]);
        assert_eq!(check_uc(&f, &x0, &cfg()).unwrap().status, Status::Holds);
        assert_eq!(check_eff(&f, &x0, &cfg()).unwrap().status, Status::Fails);
        assert_eq!(check_lc(&f, &x0, &cfg()).unwrap().status, Status::Fails);
        assert_eq!(check_lba(&f, &x0, &cfg()).unwrap().status, Status::Fails);
    }

    #[test]
    fn scaled_parabola_at_one() {
        let f = scaled_parabola();
        let x0 = qvec(&[1]);
        assert_eq!(check_uls(&f, &x0, &cfg()).unwrap().status, Status::Holds);
        assert_eq!(check_lls(&f, &x0, &cfg()).unwrap().status, Status::Holds);
        assert_eq!(check_huc(&f, &x0, &cfg()).unwrap().status, Status::Fails);
        assert_eq!(check_hlc(&f, &x0, &cfg()).unwrap().status, Status::Fails);
        let base = DirectionBase::fan(f.cone(), 64);
        for mode in [Mode::Usc, Mode::Lsc] {
            assert_eq!(check_scalar_semicontinuity(&f, &x0, &base, &cfg(), mode).unwrap().status, Status::Holds);
        }
        assert_eq!(check_uniform(&f, &x0, &base, &cfg(), Mode::Usc).unwrap().status, Status::Fails);
    }

    #[test]
    fn scaled_parabola_at_zero() {
        let f = scaled_parabola();
        let x0 = qvec(&[0]);
        assert_eq!(check_lls(&f, &x0, &cfg()).unwrap().status, Status::Holds);
        let base = DirectionBase::from_directions(f.cone(), vec![qvec(&[-1, 0])]).unwrap();
        let v = check_scalar_semicontinuity(&f, &x0, &base, &cfg(), Mode::Lsc).unwrap();
        assert_eq!(v.status, Status::Fails);
        let w = v.witness.unwrap();
        // re-check the witness directly: the scalarization drops to −∞
        let phi = crate::scalarize::scalarize_eval(&f, &w.direction.unwrap(), &w.x.unwrap()).unwrap();
        assert_eq!(phi, ExtQ::NegInf);
    }

    #[test]
    fn tilted_map_labels() {
        let f = tilted();
        let x0 = qvec(&[0]);
        let v = check_lc(&f, &x0, &cfg()).unwrap();
        assert_eq!(v.status, Status::Fails);
        let w = v.witness.unwrap();
        let value = f.evaluate(&w.x.unwrap()).unwrap();
        assert_eq!(value.meets_box(&Window::ball(&w.z.unwrap(), &w.radius.unwrap())), Some(false));
        let base = DirectionBase::fan(f.cone(), 64);
        assert_eq!(check_scalar_semicontinuity(&f, &x0, &base, &cfg(), Mode::Usc).unwrap().status, Status::Holds);
        assert_eq!(check_uniform(&f, &x0, &base, &cfg(), Mode::Usc).unwrap().status, Status::Fails);
    }

    #[test]
    fn constant_map_holds_everywhere() {
        let c = Cone::orthant(2);
        let f = SetValuedMap::constant(1, embed_point(&qvec(&[1, -1]), &c)).unwrap();
        let base = DirectionBase::fan(&c, 16);
        let m = verdict_matrix(&f, &qvec(&[0]), &cfg(), &base).unwrap();
        for (concept, v) in &m.verdicts {
            assert_eq!(v.status, Status::Holds, "{concept}");
        }
        assert!(m.violations.is_empty());
    }

    #[test]
    fn bn_condition() {
        let w = Window::cube(2, &q(1));
        assert_eq!(check_bn(&Cone::orthant(2), &w), Some(true));
        assert_eq!(check_bn(&vertical(), &w), Some(true));
        let flat = Window::new(qvec(&[0, 0]), qvec(&[0, 1])).unwrap();
        assert_eq!(check_bn(&Cone::orthant(2), &flat), None);
    }

    #[test]
    fn graph_interior_exact() {
        let c = Cone::orthant(2);
        let f = SetValuedMap::affine(1, &c, vec![qvec(&[1, 0]), qvec(&[0, 1])], vec![q(0), q(0)], vec![qvec(&[1]), qvec(&[-1])]).unwrap();
        assert!(graph_interior_witness(&f, &qvec(&[0])).unwrap().is_some());
        // z1 ≥ x together with 0 ≥ x: x0 = 0 sits on the domain boundary
        let g = SetValuedMap::affine(1, &c, vec![qvec(&[1, 0]), qvec(&[0, 0])], vec![q(0), q(0)], vec![qvec(&[1]), qvec(&[1])]).unwrap();
        assert!(graph_interior_witness(&g, &qvec(&[0])).unwrap().is_none());
        assert!(graph_interior_witness(&g, &qvec(&[-1])).unwrap().is_some());
    }

    #[test]
    fn implications_flag_contradictions() {
        let h = Verdict::holds(12, None);
        let fl = Verdict::fails(12, Witness::note("x"));
        let verdicts = vec![(Concept::Uls, h.clone()), (Concept::Lc, fl.clone())];
        let ctx = MatrixContext { convex: true, convex_valued: true, int_c: true, bn: true, in_domain: true };
        let v = implication_violations(&verdicts, &ctx);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "a");
        let fine = vec![(Concept::Uls, fl), (Concept::Lc, h)];
        // lc without uls is only contradictory when C has interior
        assert_eq!(implication_violations(&fine, &ctx)[0].rule, "b");
        let flat = MatrixContext { int_c: false, ..ctx };
        assert!(implication_violations(&fine, &flat).is_empty());
    }
}
