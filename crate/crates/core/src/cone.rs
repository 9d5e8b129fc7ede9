//! Polyhedral ordering cones and their negative duals.

use num_traits::{One, Signed, Zero};

use crate::dd::cone_generators;
use crate::error::{check_dim, Error, Result};
use crate::lp::{maximize, Halfspace, LpOutcome};
use crate::rational::{
    add_vec, dot, fmt_vec, is_zero_vec, neg_vec, normalize_inf, normalize_l1, scale_vec, to_f64, unit, zeros, Q,
};

/// A closed convex cone `C ⊆ Q^m` with `C^− ≠ {0}`.
#[derive(Clone, Debug)]
pub struct Cone {
    dim: usize,
    generators: Vec<Vec<Q>>,
    /// normals `n` with `C = {z : n·z ≥ 0}`
    halfspaces: Vec<Vec<Q>>,
    /// generators of `C^−`
    dual_generators: Vec<Vec<Q>>,
    pointed: bool,
    has_interior: bool,
}

fn push_unique(out: &mut Vec<Vec<Q>>, d: Vec<Q>) {
    if !out.contains(&d) {
        out.push(d);
    }
}

fn dedup(v: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    for g in v {
        if !is_zero_vec(&g) && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Whether `{z : n·z ≥ 0 for every n}` has nonempty interior.
fn full_dimensional(dim: usize, normals: &[Vec<Q>]) -> bool {
    // max s subject to n·z ≥ s for every n, s ≤ 1
    let mut rows: Vec<Halfspace> = normals
        .iter()
        .map(|n| {
            let mut r = n.clone();
            r.push(-Q::one());
            Halfspace::new(r, Q::zero())
        })
        .collect();
    let mut cap = zeros(dim + 1);
    cap[dim] = -Q::one();
    rows.push(Halfspace::new(cap, -Q::one()));
    match maximize(&unit(dim + 1, dim), &rows) {
        LpOutcome::Optimal { value, .. } => value.is_positive(),
        LpOutcome::Unbounded => true,
        LpOutcome::Infeasible => false,
    }
}

impl Cone {
    /// Conic hull of the given generators.
    pub fn from_generators(dim: usize, generators: Vec<Vec<Q>>) -> Result<Cone> {
        for g in &generators {
            check_dim(dim, g.len())?;
        }
        let generators = dedup(generators.iter().map(|g| normalize_inf(g)).collect());
        let dual_constraints: Vec<Vec<Q>> = generators.iter().map(|g| neg_vec(g)).collect();
        let dual_generators = dedup(cone_generators(&dual_constraints, dim));
        Self::assemble(dim, generators, dual_generators)
    }

    /// `{z : n·z ≥ 0 for every normal n}`.
    pub fn from_halfspaces(dim: usize, normals: Vec<Vec<Q>>) -> Result<Cone> {
        for n in &normals {
            check_dim(dim, n.len())?;
        }
        let generators = dedup(cone_generators(&normals, dim));
        let dual_constraints: Vec<Vec<Q>> = generators.iter().map(|g| neg_vec(g)).collect();
        let dual_generators = dedup(cone_generators(&dual_constraints, dim));
        Self::assemble(dim, generators, dual_generators)
    }

    fn assemble(dim: usize, generators: Vec<Vec<Q>>, dual_generators: Vec<Vec<Q>>) -> Result<Cone> {
        if dim == 0 {
            return Err(Error::Malformed("cone dimension must be positive".into()));
        }
        if dual_generators.is_empty() {
            return Err(Error::TrivialDualCone);
        }
        let halfspaces: Vec<Vec<Q>> = dual_generators.iter().map(|y| neg_vec(y)).collect();
        let has_interior = full_dimensional(dim, &halfspaces);
        // pointed iff C^− = {y : −g·y ≥ 0} is full-dimensional
        let dual_normals: Vec<Vec<Q>> = generators.iter().map(|g| neg_vec(g)).collect();
        let pointed = full_dimensional(dim, &dual_normals);
        Ok(Cone { dim, generators, halfspaces, dual_generators, pointed, has_interior })
    }

    /// The nonnegative orthant of `Q^dim`.
    pub fn orthant(dim: usize) -> Cone {
        Self::from_generators(dim, (0..dim).map(|i| unit(dim, i)).collect()).expect("orthant is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Q>] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[Vec<Q>] {
        &self.halfspaces
    }

    pub fn dual_generators(&self) -> &[Vec<Q>] {
        &self.dual_generators
    }

    pub fn pointed(&self) -> bool {
        self.pointed
    }

    pub fn has_interior(&self) -> bool {
        self.has_interior
    }

    pub fn contains(&self, z: &[Q]) -> bool {
        self.halfspaces.iter().all(|n| !dot(n, z).is_negative())
    }

    /// Whether `y ∈ C^−`.
    pub fn dual_contains(&self, y: &[Q]) -> bool {
        self.generators.iter().all(|g| !dot(g, y).is_positive())
    }

    /// Rejects directions outside `C^− \ {0}`.
    pub fn check_direction(&self, zstar: &[Q]) -> Result<()> {
        check_dim(self.dim, zstar.len())?;
        if is_zero_vec(zstar) || !self.dual_contains(zstar) {
            return Err(Error::NotInDualCone(format!("{:?}", fmt_vec(zstar))));
        }
        Ok(())
    }

    /// Extreme rays of `C^−` (both signs of lineality directions), scaled to unit 1-norm.
    pub fn dual_rays(&self) -> Vec<Vec<Q>> {
        self.dual_generators.iter().map(|y| normalize_l1(y)).collect()
    }

    /// Directions spanning `C^−`: the extreme rays plus interpolated
    /// directions, roughly `size` in total (planar case), all of unit 1-norm.
    pub fn dual_fan(&self, size: usize) -> Vec<Vec<Q>> {
        let rays = self.dual_rays();
        let sectors = self.dual_sectors();
        let mut out = rays.clone();
        if sectors.is_empty() {
            return out;
        }
        let per = (size.saturating_sub(rays.len()) / sectors.len()).max(1) + 1;
        let steps = Q::from_integer((per as i64).into());
        for (u, v) in &sectors {
            for i in 1..per {
                let s = Q::from_integer((i as i64).into()) / &steps;
                let d = add_vec(&scale_vec(u, &(Q::one() - &s)), &scale_vec(v, &s));
                push_unique(&mut out, normalize_l1(&d));
            }
        }
        out
    }

    /// Directions accumulating at each extreme ray of `C^−`: `u + 2^{-j} v`
    /// for neighbouring rays `v` and `j = 1..=depth`.
    pub fn dual_near_rays(&self, depth: u32) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for (u, v) in self.dual_sectors() {
            let mut w = Q::one();
            for _ in 0..depth {
                w /= Q::from_integer(2.into());
                push_unique(&mut out, normalize_l1(&add_vec(&u, &scale_vec(&v, &w))));
                push_unique(&mut out, normalize_l1(&add_vec(&v, &scale_vec(&u, &w))));
            }
        }
        out
    }

    /// Pairs of extreme rays of `C^−` whose conic hull is a 2-D face of
    /// `C^−` (planar case) or, in higher dimension, every pair whose sum
    /// is a nonzero element of `C^−`.
    fn dual_sectors(&self) -> Vec<(Vec<Q>, Vec<Q>)> {
        let rays = self.dual_rays();
        let mut out = Vec::new();
        if self.dim == 2 {
            let mut ord = rays.clone();
            ord.sort_by(|a, b| {
                let ta = to_f64(&a[1]).atan2(to_f64(&a[0]));
                let tb = to_f64(&b[1]).atan2(to_f64(&b[0]));
                ta.partial_cmp(&tb).expect("finite angles")
            });
            let k = ord.len();
            if k < 2 {
                return out;
            }
            for i in 0..k {
                let (u, v) = (&ord[i], &ord[(i + 1) % k]);
                // counter-clockwise turn of less than pi, inside the cone
                let cross = &u[0] * &v[1] - &u[1] * &v[0];
                let mid = add_vec(u, v);
                if cross.is_positive() && self.dual_contains(&mid) {
                    out.push((u.clone(), v.clone()));
                }
            }
        } else {
            for i in 0..rays.len() {
                for j in i + 1..rays.len() {
                    let mid = add_vec(&rays[i], &rays[j]);
                    if !is_zero_vec(&mid) {
                        out.push((rays[i].clone(), rays[j].clone()));
                    }
                }
            }
        }
        out
    }

    /// Mutual containment of generators.
    pub fn equivalent(&self, other: &Cone) -> bool {
        self.dim == other.dim
            && self.generators.iter().all(|g| other.contains(g))
            && other.generators.iter().all(|g| self.contains(g))
    }

    /// `C` as the rows of a polyhedron.
    pub fn rows(&self) -> Vec<Halfspace> {
        self.halfspaces.iter().map(|n| Halfspace::new(n.clone(), Q::zero())).collect()
    }
}

impl PartialEq for Cone {
    fn eq(&self, other: &Cone) -> bool {
        self.equivalent(other)
    }
}

/// The negative dual cone `C^− = {y : y·z ≤ 0 for all z ∈ C}`.
pub fn dual_cone(c: &Cone) -> Result<Cone> {
    Cone::from_generators(c.dim, c.dual_generators.clone())
}

pub fn cone_contains(c: &Cone, z: &[Q]) -> Result<bool> {
    check_dim(c.dim, z.len())?;
    Ok(c.contains(z))
}
