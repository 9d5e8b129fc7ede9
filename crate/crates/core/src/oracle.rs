//! Convex upper sets given through their support function.

use std::any::Any;
use std::fmt::Debug;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::rational::{to_f64, ExtQ, Q};

/// A closed convex set described by `y ↦ sup{y·z : z ∈ A}` on the negative
/// dual cone, optionally with exact membership.
pub trait SupportFn: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn support(&self, y: &[Q]) -> ExtQ;

    /// Exact membership, when the representation allows it.
    fn contains(&self, _z: &[Q]) -> Option<bool> {
        None
    }

    /// Exact test of `other ⊆ self` for known pairs of representations.
    fn contains_set(&self, _other: &dyn SupportFn) -> Option<bool> {
        None
    }

    /// Euclidean distance from a point, when computable.
    fn distance(&self, _p: &[f64]) -> Option<f64> {
        None
    }

    fn describe(&self) -> String;

    fn as_any(&self) -> &dyn Any;
}

/// `tA + R²_+` with `A = {z : z2 ≥ z1²}` and `t > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolaSet {
    pub scale: Q,
}

impl ParabolaSet {
    pub fn new(scale: Q) -> Self {
        debug_assert!(scale.is_positive());
        ParabolaSet { scale }
    }

    /// Euclidean distance from `p` to the set.
    pub fn euclidean_distance(&self, p: &[f64]) -> f64 {
        let t = to_f64(&self.scale);
        let (p1, p2) = (p[0], p[1]);
        if t * p2 >= p1.min(0.0).powi(2) {
            return 0.0;
        }
        // boundary: {(s, s²/t) : s ≤ 0} ∪ {(s, 0) : s ≥ 0}
        let mut best = f64::INFINITY;
        let flat = if p1 >= 0.0 { p2.abs() } else { p1.hypot(p2) };
        best = best.min(flat);
        // stationary points of (s − p1)² + (s²/t − p2)²:
        // (2/t²) s³ + (1 − 2 p2/t) s − p1 = 0
        for s in cubic_real_roots(2.0 / (t * t), 0.0, 1.0 - 2.0 * p2 / t, -p1)
            .into_iter()
            .chain([0.0])
        {
            if s <= 0.0 {
                best = best.min((s - p1).hypot(s * s / t - p2));
            }
        }
        best
    }
}

/// Real roots of `a s³ + b s² + c s + d` with `a ≠ 0`, polished by Newton steps.
fn cubic_real_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    // depressed cubic u³ + p u + q with s = u − b/3
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc > 0.0 {
        let r = disc.sqrt();
        vec![(-q / 2.0 + r).cbrt() + (-q / 2.0 - r).cbrt()]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        if m == 0.0 {
            vec![0.0]
        } else {
            let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
                .collect()
        }
    };
    for u in roots.iter_mut() {
        *u -= b / 3.0;
        for _ in 0..4 {
            let f = ((*u + b) * *u + c) * *u + d;
            let df = (3.0 * *u + 2.0 * b) * *u + c;
            if df.abs() > 1e-300 {
                *u -= f / df;
            }
        }
    }
    roots
}

impl SupportFn for ParabolaSet {
    fn dim(&self) -> usize {
        2
    }

    fn support(&self, y: &[Q]) -> ExtQ {
        let (a, b) = (&y[0], &y[1]);
        if b.is_negative() {
            if a.is_positive() {
                return ExtQ::PosInf;
            }
            // maximizer s = −a/(2b) on the parabola
            let four = Q::from_integer(4.into());
            return ExtQ::Fin(-(&self.scale * a * a) / (four * b));
        }
        if b.is_zero() && !a.is_positive() {
            if a.is_zero() {
                return ExtQ::Fin(Q::zero());
            }
            return ExtQ::PosInf;
        }
        ExtQ::PosInf
    }

    fn contains(&self, z: &[Q]) -> Option<bool> {
        let m = if z[0].is_negative() { z[0].clone() } else { Q::zero() };
        Some(&self.scale * &z[1] >= &m * &m)
    }

    fn contains_set(&self, other: &dyn SupportFn) -> Option<bool> {
        // sA + R²_+ ⊆ tA + R²_+ exactly when s ≤ t
        other.as_any().downcast_ref::<ParabolaSet>().map(|o| o.scale <= self.scale)
    }

    fn distance(&self, p: &[f64]) -> Option<f64> {
        Some(self.euclidean_distance(p))
    }

    fn describe(&self) -> String {
        format!("parabola(scale={})", crate::rational::fmt_q(&self.scale))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `tA` for a positive factor.
#[derive(Clone, Debug)]
pub struct ScaledSet {
    pub inner: Arc<dyn SupportFn>,
    pub factor: Q,
}

impl SupportFn for ScaledSet {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn support(&self, y: &[Q]) -> ExtQ {
        self.inner.support(y).scale_pos(&self.factor)
    }

    fn contains(&self, z: &[Q]) -> Option<bool> {
        let w: Vec<Q> = z.iter().map(|v| v / &self.factor).collect();
        self.inner.contains(&w)
    }

    fn describe(&self) -> String {
        format!("{}*{}", crate::rational::fmt_q(&self.factor), self.inner.describe())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Minkowski sum of convex sets; support values add.
#[derive(Clone, Debug)]
pub struct SumSet {
    pub parts: Vec<Arc<dyn SupportFn>>,
}

impl SupportFn for SumSet {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn support(&self, y: &[Q]) -> ExtQ {
        self.parts.iter().fold(ExtQ::zero(), |acc, p| acc + p.support(y))
    }

    fn describe(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|p| p.describe()).collect();
        names.join(" + ")
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
