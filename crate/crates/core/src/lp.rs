//! Exact two-phase simplex over the rationals with Bland's anti-cycling rule.
//!
//! The public entry point [`maximize`] works with free variables and
//! inequality rows `n·z ≥ b`; internally the problem is brought to standard
//! form `A x = b, x ≥ 0` by splitting `z = u − v` and adding surplus columns.

use num_traits::{Signed, Zero};

use crate::rational::{dot, Q};

/// Closed halfspace `{z : normal·z ≥ offset}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub normal: Vec<Q>,
    pub offset: Q,
}

impl Halfspace {
    pub fn new(normal: Vec<Q>, offset: Q) -> Self {
        Halfspace { normal, offset }
    }

    pub fn contains(&self, z: &[Q]) -> bool {
        dot(&self.normal, z) >= self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, point: Vec<Q> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }

    pub fn point(&self) -> Option<&[Q]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// Maximizes `objective·z` over `{z ∈ Q^d : n_i·z ≥ b_i}` with `d = objective.len()`.
pub fn maximize(objective: &[Q], rows: &[Halfspace]) -> LpOutcome {
    let d = objective.len();
    let m = rows.len();
    // columns: u (d), v (d), surplus (m)
    let ncols = 2 * d + m;
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.normal.len(), d);
        let mut r = vec![Q::zero(); ncols];
        for j in 0..d {
            r[j] = row.normal[j].clone();
            r[d + j] = -row.normal[j].clone();
        }
        r[2 * d + i] = Q::from_integer((-1).into());
        a.push(r);
        b.push(row.offset.clone());
    }
    let mut c = vec![Q::zero(); ncols];
    for j in 0..d {
        c[j] = objective[j].clone();
        c[d + j] = -objective[j].clone();
    }
    match standard_form_max(&a, &b, &c) {
        StdOutcome::Infeasible => LpOutcome::Infeasible,
        StdOutcome::Unbounded => LpOutcome::Unbounded,
        StdOutcome::Optimal { value, x } => {
            let point = (0..d).map(|j| &x[j] - &x[d + j]).collect();
            LpOutcome::Optimal { value, point }
        }
    }
}

/// Feasibility of a system of halfspaces; returns a point when feasible.
pub fn feasible_point(dim: usize, rows: &[Halfspace]) -> Option<Vec<Q>> {
    match maximize(&vec![Q::zero(); dim], rows) {
        LpOutcome::Optimal { point, .. } => Some(point),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        LpOutcome::Infeasible => None,
    }
}

enum StdOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Unbounded,
    Infeasible,
}

struct Tableau {
    /// constraint rows, each `ncols + 1` wide (last entry is the right-hand side)
    rows: Vec<Vec<Q>>,
    /// objective row in "z − c·x = 0" form; last entry is the current value
    obj: Vec<Q>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Runs simplex iterations with Bland's rule over columns `< allowed`.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| self.obj[j].is_negative());
            let Some(col) = entering else { return true };
            let rhs = self.ncols;
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = &row[rhs] / &row[col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

fn standard_form_max(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> StdOutcome {
    let m = a.len();
    let n = c.len();
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut r = vec![Q::zero(); ncols + 1];
        for j in 0..n {
            r[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        r[n + i] = Q::from_integer(1.into());
        r[ncols] = if flip { -b[i].clone() } else { b[i].clone() };
        rows.push(r);
    }
    // phase 1: maximize −Σ artificials
    let mut obj = vec![Q::zero(); ncols + 1];
    for j in n..ncols {
        obj[j] = Q::from_integer(1.into());
    }
    for r in &rows {
        for (o, v) in obj.iter_mut().zip(r) {
            *o -= v;
        }
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..ncols).collect(),
        ncols,
    };
    t.optimize(ncols);
    if t.obj[ncols].is_negative() {
        return StdOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(col) => {
                    t.pivot(i, col);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    // phase 2
    let mut obj = vec![Q::zero(); ncols + 1];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    for (i, &bv) in t.basis.iter().enumerate() {
        if !obj[bv].is_zero() {
            let f = obj[bv].clone();
            for (o, v) in obj.iter_mut().zip(&t.rows[i]) {
                if !v.is_zero() {
                    *o -= &f * v;
                }
            }
        }
    }
    t.obj = obj;
    if !t.optimize(n) {
        return StdOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][ncols].clone();
        }
    }
    let value = dot(c, &x);
    StdOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    fn hs(n: &[i64], b: i64) -> Halfspace {
        Halfspace::new(qvec(n), q(b))
    }

    #[test]
    fn bounded_interval() {
        let out = maximize(&qvec(&[1]), &[hs(&[1], 0), hs(&[-1], -1)]);
        assert_eq!(out, LpOutcome::Optimal { value: q(1), point: qvec(&[1]) });
    }

    #[test]
    fn unbounded_ray() {
        assert_eq!(maximize(&qvec(&[1]), &[hs(&[1], 0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_pair() {
        assert_eq!(maximize(&qvec(&[1]), &[hs(&[1], 1), hs(&[-1], 0)]), LpOutcome::Infeasible);
    }

    #[test]
    fn no_rows_zero_objective() {
        assert_eq!(
            maximize(&qvec(&[0, 0]), &[]),
            LpOutcome::Optimal { value: q(0), point: qvec(&[0, 0]) }
        );
        assert_eq!(maximize(&qvec(&[0, 1]), &[]), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // many constraints active at the origin
        let rows = vec![
            hs(&[1, 0], 0),
            hs(&[0, 1], 0),
            hs(&[1, 1], 0),
            hs(&[-1, -1], -2),
            hs(&[1, -1], -2),
            hs(&[-1, 1], -2),
        ];
        match maximize(&qvec(&[1, 2]), &rows) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(4)),
            other => panic!("{other:?}"),
        }
    }
}
