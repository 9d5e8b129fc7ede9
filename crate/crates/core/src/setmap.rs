//! Set-valued maps `R^n → F(Z, C)` from a small constructor family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::{One, Signed, Zero};

use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::lp::Halfspace;
use crate::polyhedron::Polyhedron;
use crate::rational::{add_vec, dot, fmt_vec, scale_vec, Q};
use crate::upperset::{minkowski_sum, scale, set_order_leq, UpperSet};
use crate::verdict::{Verdict, Witness};

pub use crate::continuity::graph_interior_witness;

/// `x ↦ {z : N(x) z ≥ q + L x}` with `N(x) = N + Σ_k x_k N_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFamily {
    /// rows of `N` (r × m)
    pub normals: Vec<Vec<Q>>,
    /// `N_k` for each coordinate of x; empty when the normals do not depend on x
    pub normal_slopes: Vec<Vec<Vec<Q>>>,
    pub offsets: Vec<Q>,
    /// rows of `L` (r × n)
    pub slopes: Vec<Vec<Q>>,
}

impl AffineFamily {
    pub fn fixed_normals(&self) -> bool {
        self.normal_slopes.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.normals.len()
    }

    pub fn normals_at(&self, x: &[Q]) -> Vec<Vec<Q>> {
        let mut n = self.normals.clone();
        for (k, nk) in self.normal_slopes.iter().enumerate() {
            for (row, slope) in n.iter_mut().zip(nk) {
                *row = add_vec(row, &scale_vec(slope, &x[k]));
            }
        }
        n
    }

    pub fn value_rows(&self, x: &[Q]) -> Vec<Halfspace> {
        self.normals_at(x)
            .into_iter()
            .zip(self.offsets.iter().zip(&self.slopes))
            .map(|(n, (qi, li))| Halfspace::new(n, qi + dot(li, x)))
            .collect()
    }

    /// The graph `{(x, z) : N z − L x ≥ q}` (fixed normals only).
    pub fn graph_rows(&self) -> Vec<Halfspace> {
        self.normals
            .iter()
            .zip(self.offsets.iter().zip(&self.slopes))
            .map(|(n, (qi, li))| {
                let mut row: Vec<Q> = li.iter().map(|v| -v).collect();
                row.extend(n.iter().cloned());
                Halfspace::new(row, qi.clone())
            })
            .collect()
    }
}

/// `α(x) = coeffs·x + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineScalar {
    pub coeffs: Vec<Q>,
    pub constant: Q,
}

impl AffineScalar {
    pub fn eval(&self, x: &[Q]) -> Q {
        dot(&self.coeffs, x) + &self.constant
    }
}

/// `a·x ≥ b`, or `a·x > b` when strict.
#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub normal: Vec<Q>,
    pub offset: Q,
    pub strict: bool,
}

impl Guard {
    pub fn accepts(&self, x: &[Q]) -> bool {
        let v = dot(&self.normal, x);
        if self.strict {
            v > self.offset
        } else {
            v >= self.offset
        }
    }
}

#[derive(Clone, Debug)]
pub enum Body {
    Affine(AffineFamily),
    /// `α(x)·A + C`, empty where `α(x) < 0`.
    ScaledBase { base: UpperSet, alpha: AffineScalar },
    Constant(UpperSet),
    Piecewise { guard: Guard, then: Box<Body>, otherwise: Box<Body> },
}

#[derive(Clone, Debug)]
pub struct SetValuedMap {
    domain_dim: usize,
    cone: Cone,
    body: Body,
    pub declared_domain: Option<Polyhedron>,
}

fn check_body(n: usize, c: &Cone, body: &Body) -> Result<()> {
    match body {
        Body::Affine(a) => {
            let r = a.normals.len();
            if a.offsets.len() != r || a.slopes.len() != r {
                return Err(Error::Malformed("affine family: row counts differ".into()));
            }
            for (nr, lr) in a.normals.iter().zip(&a.slopes) {
                check_dim(c.dim(), nr.len())?;
                check_dim(n, lr.len())?;
            }
            if a.fixed_normals() {
                for nr in &a.normals {
                    if c.generators().iter().any(|g| dot(nr, g).is_negative()) {
                        return Err(Error::Malformed(format!(
                            "row normal {:?} is negative on a cone generator",
                            fmt_vec(nr)
                        )));
                    }
                }
            } else {
                check_dim(n, a.normal_slopes.len())?;
                for nk in &a.normal_slopes {
                    check_dim(r, nk.len())?;
                    for row in nk {
                        check_dim(c.dim(), row.len())?;
                    }
                }
            }
            Ok(())
        }
        Body::ScaledBase { base, alpha } => {
            check_dim(n, alpha.coeffs.len())?;
            check_dim(c.dim(), base.dim())?;
            if !base.is_convex() {
                return Err(Error::NonConvexOperand("scaled base set".into()));
            }
            Ok(())
        }
        Body::Constant(v) => check_dim(c.dim(), v.dim()),
        Body::Piecewise { guard, then, otherwise } => {
            check_dim(n, guard.normal.len())?;
            check_body(n, c, then)?;
            check_body(n, c, otherwise)
        }
    }
}

fn eval_body(body: &Body, c: &Cone, x: &[Q]) -> Result<UpperSet> {
    match body {
        Body::Affine(a) => {
            let rows = a.value_rows(x);
            let p = Polyhedron::new(c.dim(), rows)?;
            UpperSet::from_polyhedron(c, p)
        }
        Body::ScaledBase { base, alpha } => {
            let t = alpha.eval(x);
            if t.is_negative() {
                return Ok(UpperSet::empty(c));
            }
            scale(base, &t)
        }
        Body::Constant(v) => Ok(v.clone()),
        Body::Piecewise { guard, then, otherwise } => {
            if guard.accepts(x) {
                eval_body(then, c, x)
            } else {
                eval_body(otherwise, c, x)
            }
        }
    }
}

fn body_convex(body: &Body) -> bool {
    match body {
        Body::Affine(a) => a.fixed_normals(),
        Body::ScaledBase { base, .. } => base.is_convex(),
        Body::Constant(v) => v.is_convex(),
        // restriction of a convex map to a halfspace
        Body::Piecewise { then, otherwise, .. } => match (then.as_ref(), otherwise.as_ref()) {
            (b, Body::Constant(e)) if e.is_empty() => body_convex(b),
            _ => false,
        },
    }
}

/// Fixes the leading `prefix.len()` coordinates of x.
fn restrict_body(body: &Body, prefix: &[Q]) -> Body {
    let k = prefix.len();
    match body {
        Body::Affine(a) => {
            let normals = a.normals_at(&pad(prefix, a.normal_slopes.len()));
            let normal_slopes = if a.fixed_normals() { Vec::new() } else { a.normal_slopes[k..].to_vec() };
            let offsets = a.offsets.iter().zip(&a.slopes).map(|(qi, li)| qi + dot(&li[..k], prefix)).collect();
            let slopes = a.slopes.iter().map(|li| li[k..].to_vec()).collect();
            Body::Affine(AffineFamily { normals, normal_slopes, offsets, slopes })
        }
        Body::ScaledBase { base, alpha } => Body::ScaledBase {
            base: base.clone(),
            alpha: AffineScalar {
                coeffs: alpha.coeffs[k..].to_vec(),
                constant: &alpha.constant + dot(&alpha.coeffs[..k], prefix),
            },
        },
        Body::Constant(v) => Body::Constant(v.clone()),
        Body::Piecewise { guard, then, otherwise } => Body::Piecewise {
            guard: Guard {
                normal: guard.normal[k..].to_vec(),
                offset: &guard.offset - dot(&guard.normal[..k], prefix),
                strict: guard.strict,
            },
            then: Box::new(restrict_body(then, prefix)),
            otherwise: Box::new(restrict_body(otherwise, prefix)),
        },
    }
}

/// `prefix` padded with zeros to length `n` (only the prefix part of the
/// normal slopes is applied).
fn pad(prefix: &[Q], n: usize) -> Vec<Q> {
    let mut v = prefix.to_vec();
    v.resize(n.max(prefix.len()), Q::zero());
    v
}

impl SetValuedMap {
    pub fn new(domain_dim: usize, cone: &Cone, body: Body) -> Result<Self> {
        check_body(domain_dim, cone, &body)?;
        Ok(SetValuedMap { domain_dim, cone: cone.clone(), body, declared_domain: None })
    }

    pub fn affine(
        domain_dim: usize,
        cone: &Cone,
        normals: Vec<Vec<Q>>,
        offsets: Vec<Q>,
        slopes: Vec<Vec<Q>>,
    ) -> Result<Self> {
        Self::new(domain_dim, cone, Body::Affine(AffineFamily { normals, normal_slopes: Vec::new(), offsets, slopes }))
    }

    pub fn constant(domain_dim: usize, value: UpperSet) -> Result<Self> {
        let c = value.cone().clone();
        Self::new(domain_dim, &c, Body::Constant(value))
    }

    pub fn with_domain(mut self, dom: Polyhedron) -> Result<Self> {
        check_dim(self.domain_dim, dom.dim())?;
        self.declared_domain = Some(dom);
        Ok(self)
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn image_dim(&self) -> usize {
        self.cone.dim()
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// The affine family when the body is one with fixed normals.
    pub fn fixed_affine(&self) -> Option<&AffineFamily> {
        match &self.body {
            Body::Affine(a) if a.fixed_normals() => Some(a),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &[Q]) -> Result<UpperSet> {
        check_dim(self.domain_dim, x.len())?;
        eval_body(&self.body, &self.cone, x)
    }

    pub fn in_domain(&self, x: &[Q]) -> Result<bool> {
        Ok(!self.evaluate(x)?.is_empty())
    }

    /// Convexity that follows from the constructor alone.
    pub fn structurally_convex(&self) -> bool {
        body_convex(&self.body)
    }

    /// `y ↦ f(x0, y)` for a map on `R^{k} × R^{n−k}`.
    pub fn restrict_prefix(&self, x0: &[Q]) -> Result<SetValuedMap> {
        if x0.len() > self.domain_dim {
            return Err(Error::DimensionMismatch { expected: self.domain_dim, got: x0.len() });
        }
        let body = restrict_body(&self.body, x0);
        SetValuedMap::new(self.domain_dim - x0.len(), &self.cone, body)
    }
}

/// Seeded random triples `(x1, x2, t)` for convexity tests.
#[derive(Clone, Debug)]
pub struct SamplingPlan {
    pub seed: u64,
    pub triples: usize,
    /// sample x from `[−radius, radius]^n` on a grid of step `1/denominator`
    pub radius: i64,
    pub denominator: i64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { seed: 0, triples: 24, radius: 3, denominator: 4 }
    }
}

impl SamplingPlan {
    pub fn draw(&self, n: usize) -> Vec<(Vec<Q>, Vec<Q>, Q)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = self.denominator;
        let span = self.radius * d;
        let point = |rng: &mut ChaCha8Rng| -> Vec<Q> {
            (0..n).map(|_| Q::new(rng.gen_range(-span..=span).into(), d.into())).collect()
        };
        (0..self.triples)
            .map(|_| {
                let a = point(&mut rng);
                let b = point(&mut rng);
                let t = Q::new(rng.gen_range(1..8).into(), 8.into());
                (a, b, t)
            })
            .collect()
    }
}

/// Tests `f(t x1 + (1−t) x2) ⊇ t f(x1) + (1−t) f(x2)` on sampled triples.
pub fn convexity_check(f: &SetValuedMap, samples: &SamplingPlan) -> Result<Verdict> {
    let mut uncertified = false;
    for (i, (x1, x2, t)) in samples.draw(f.domain_dim()).into_iter().enumerate() {
        let s = Q::one() - &t;
        let xm = add_vec(&scale_vec(&x1, &t), &scale_vec(&x2, &s));
        let (v1, v2, vm) = (f.evaluate(&x1)?, f.evaluate(&x2)?, f.evaluate(&xm)?);
        for v in [&v1, &v2, &vm] {
            if !v.is_convex() {
                return Err(Error::NonConvexOperand("union-valued map".into()));
            }
        }
        let rhs = minkowski_sum(&scale(&v1, &t)?, &scale(&v2, &s)?)?;
        let r = set_order_leq(&vm, &rhs)?;
        if !r.leq {
            let w = Witness {
                x: Some(xm),
                direction: None,
                z: None,
                radius: Some(t),
                detail: format!("midpoint value misses part of the combination of f{:?} and f{:?}", fmt_vec(&x1), fmt_vec(&x2)),
            };
            return Ok(Verdict::fails(i, w));
        }
        uncertified |= !r.certified;
    }
    let detail = if uncertified { "holds on samples (direction grid)" } else { "holds on samples" };
    Ok(Verdict::holds(samples.triples, Some(Witness::note(detail))))
}
