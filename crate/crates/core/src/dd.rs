//! Representation conversion: double description for cones and
//! Fourier–Motzkin elimination for projections of polyhedra.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::lp::{maximize, Halfspace, LpOutcome};
use crate::rational::{dot, is_zero_vec, normalize_inf, scale_vec, sub_vec, unit, Q};

/// Generators of the polyhedral cone `{y ∈ Q^dim : a·y ≥ 0 for every a}`.
///
/// Lineality directions are returned as opposite pairs, so the cone is
/// exactly the conic hull of the output. An empty output means the cone is `{0}`.
pub fn cone_generators(constraints: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    let mut lineality: Vec<Vec<Q>> = (0..dim).map(|i| unit(dim, i)).collect();
    // each ray carries the set of processed constraints tight on it
    let mut rays: Vec<(Vec<Q>, BTreeSet<usize>)> = Vec::new();

    for (k, a) in constraints.iter().enumerate() {
        debug_assert_eq!(a.len(), dim);
        if is_zero_vec(a) {
            for (_, z) in rays.iter_mut() {
                z.insert(k);
            }
            continue;
        }
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lineality.remove(pos);
            let mut al = dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            for other in lineality.iter_mut() {
                let f = dot(a, other) / &al;
                if !f.is_zero() {
                    *other = sub_vec(other, &scale_vec(&l, &f));
                }
            }
            for (r, z) in rays.iter_mut() {
                let f = dot(a, r) / &al;
                if !f.is_zero() {
                    *r = normalize_inf(&sub_vec(r, &scale_vec(&l, &f)));
                }
                z.insert(k);
            }
            rays.push((normalize_inf(&l), (0..k).collect()));
            continue;
        }
        let vals: Vec<Q> = rays.iter().map(|(r, _)| dot(a, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for (i, (_, z)) in rays.iter_mut().enumerate() {
                if vals[i].is_zero() {
                    z.insert(k);
                }
            }
            continue;
        }
        let mut next: Vec<(Vec<Q>, BTreeSet<usize>)> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: BTreeSet<usize> = rays[p].1.intersection(&rays[n].1).copied().collect();
                let adjacent = (0..rays.len())
                    .filter(|&t| t != p && t != n)
                    .all(|t| !common.is_subset(&rays[t].1));
                if !adjacent {
                    continue;
                }
                // (a·p) n − (a·n) p lies on the hyperplane a·y = 0
                let comb = sub_vec(&scale_vec(&rays[n].0, &vals[p]), &scale_vec(&rays[p].0, &vals[n]));
                if is_zero_vec(&comb) {
                    continue;
                }
                let mut z = common;
                z.insert(k);
                next.push((normalize_inf(&comb), z));
            }
        }
        let mut kept: Vec<(Vec<Q>, BTreeSet<usize>)> = Vec::new();
        for (i, (r, mut z)) in rays.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            if vals[i].is_zero() {
                z.insert(k);
            }
            kept.push((r, z));
        }
        for item in next {
            if !kept.iter().any(|(r, _)| *r == item.0) {
                kept.push(item);
            }
        }
        rays = kept;
    }
    let mut out: Vec<Vec<Q>> = rays.into_iter().map(|(r, _)| r).collect();
    for l in lineality {
        let l = normalize_inf(&l);
        out.push(l.iter().map(|x| -x).collect());
        out.push(l);
    }
    out
}

/// Canonical scaling of a halfspace: the normal's largest entry becomes ±1.
/// Rows with a zero normal are either trivially true (`None`) or the
/// contradiction `0 ≥ 1`.
pub fn normalize_row(h: &Halfspace) -> Option<Halfspace> {
    if is_zero_vec(&h.normal) {
        if h.offset.is_positive() {
            return Some(Halfspace::new(h.normal.clone(), Q::one()));
        }
        return None;
    }
    let s = crate::rational::norm_inf(&h.normal);
    Some(Halfspace::new(
        h.normal.iter().map(|x| x / &s).collect(),
        &h.offset / &s,
    ))
}

/// Removes duplicate and LP-redundant rows. An infeasible system collapses
/// to the single contradiction `0·z ≥ 1`.
pub fn reduce_rows(dim: usize, rows: &[Halfspace]) -> Vec<Halfspace> {
    let mut uniq: Vec<Halfspace> = Vec::new();
    for h in rows.iter().filter_map(normalize_row) {
        if !uniq.contains(&h) {
            uniq.push(h);
        }
    }
    if crate::lp::feasible_point(dim, &uniq).is_none() {
        return vec![Halfspace::new(vec![Q::zero(); dim], Q::one())];
    }
    let mut i = 0;
    while i < uniq.len() {
        let h = uniq[i].clone();
        let others: Vec<Halfspace> = uniq
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| r.clone())
            .collect();
        let neg: Vec<Q> = h.normal.iter().map(|x| -x).collect();
        let redundant = match maximize(&neg, &others) {
            LpOutcome::Optimal { value, .. } => -value >= h.offset,
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => true,
        };
        if redundant {
            uniq.remove(i);
        } else {
            i += 1;
        }
    }
    uniq
}

/// Projects `{(z, w) : rows}` with `z ∈ Q^keep` onto the `z` coordinates by
/// eliminating the trailing variables one at a time.
pub fn project(rows: &[Halfspace], total: usize, keep: usize) -> Vec<Halfspace> {
    let mut cur: Vec<Halfspace> = reduce_rows(total, rows);
    for width in (keep..total).rev() {
        let j = width;
        let mut next = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for h in &cur {
            let c = &h.normal[j];
            if c.is_positive() {
                pos.push(h);
            } else if c.is_negative() {
                neg.push(h);
            } else {
                next.push(Halfspace::new(h.normal[..j].to_vec(), h.offset.clone()));
            }
        }
        for p in &pos {
            for n in &neg {
                let cp = &p.normal[j];
                let cn = -&n.normal[j];
                let normal: Vec<Q> = (0..j).map(|i| &p.normal[i] * &cn + &n.normal[i] * cp).collect();
                let offset = &p.offset * &cn + &n.offset * cp;
                next.push(Halfspace::new(normal, offset));
            }
        }
        cur = reduce_rows(j, &next);
    }
    cur
}
