//! Exact rational linear algebra: row reduction, phase-one simplex with a
//! Farkas certificate, and vertex enumeration by pivoting between feasible
//! bases.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

/// Reduced row echelon form of `[A | b]`.
#[derive(Clone, Debug)]
pub struct Rref {
    /// Nonzero rows of the reduced matrix.
    pub rows: Vec<Vec<Q>>,
    pub rhs: Vec<Q>,
    /// Pivot column of each row.
    pub pivots: Vec<usize>,
    /// Multipliers `y` with `yᵀA = 0` and `yᵀb ≠ 0` when the system has no
    /// solution at all.
    pub inconsistency: Option<Vec<Q>>,
    pub columns: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.columns).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Basis of `{x : Ax = 0}`, one vector per free column.
    pub fn null_basis(&self) -> Vec<Vec<Q>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![Q::zero(); self.columns];
                v[f] = Q::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect()
    }
}

pub fn rref(a: &[Vec<Q>], b: &[Q]) -> Rref {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    // [A | b | I] so row operations are tracked.
    let mut t: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, bi))| {
            let mut r = row.clone();
            r.push(bi.clone());
            r.extend((0..m).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..n {
        let Some(p) = (next..m).find(|&r| !t[r][col].is_zero()) else { continue };
        t.swap(next, p);
        let inv = Q::one() / &t[next][col];
        for x in t[next].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m {
            if r != next && !t[r][col].is_zero() {
                let factor = t[r][col].clone();
                let (src, dst) = if r < next {
                    let (lo, hi) = t.split_at_mut(next);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = t.split_at_mut(r);
                    (&lo[next], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &factor * s;
                    }
                }
            }
        }
        pivots.push(col);
        next += 1;
        if next == m {
            break;
        }
    }
    let inconsistency = t[next..].iter().find(|r| !r[n].is_zero()).map(|r| r[n + 1..].to_vec());
    let rows = t[..next].iter().map(|r| r[..n].to_vec()).collect();
    let rhs = t[..next].iter().map(|r| r[n].clone()).collect();
    Rref { rows, rhs, pivots, inconsistency, columns: n }
}

/// Simplex tableau in canonical form for `Ax = b, x >= 0`.
#[derive(Clone, Debug)]
pub struct Tableau {
    /// Each row holds the coefficients followed by the right-hand side.
    pub rows: Vec<Vec<Q>>,
    pub basis: Vec<usize>,
    pub columns: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        pivot_rows(&mut self.rows, row, col);
        self.basis[row] = col;
    }

    /// The basic feasible solution of this tableau.
    pub fn vertex(&self) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.columns];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            x[b] = row[self.columns].clone();
        }
        x
    }
}

fn pivot_rows(rows: &mut [Vec<Q>], row: usize, col: usize) {
    let inv = Q::one() / &rows[row][col];
    for x in rows[row].iter_mut() {
        *x *= &inv;
    }
    let pivot = rows[row].clone();
    for (r, other) in rows.iter_mut().enumerate() {
        if r != row && !other[col].is_zero() {
            let factor = other[col].clone();
            for (d, s) in other.iter_mut().zip(&pivot) {
                if !s.is_zero() {
                    *d -= &factor * s;
                }
            }
        }
    }
}

/// Phase-one simplex (Bland's rule). Returns a feasible canonical tableau
/// with redundant rows removed, or multipliers `y` with `yᵀA <= 0` and
/// `yᵀb > 0`, which prove that no `x >= 0` solves the system.
pub fn phase_one(a: &[Vec<Q>], b: &[Q]) -> Result<Tableau, Vec<Q>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m;
    let mut flip = vec![false; m];
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        flip[i] = b[i].is_negative();
        let sign = if flip[i] { -Q::one() } else { Q::one() };
        let mut r: Vec<Q> = a[i].iter().map(|x| x * &sign).collect();
        r.extend((0..m).map(|j| if i == j { Q::one() } else { Q::zero() }));
        r.push(&b[i] * &sign);
        rows.push(r);
    }
    // Objective row: reduced costs for minimizing the artificial sum.
    let mut z = vec![Q::zero(); width + 1];
    for r in &rows {
        for j in 0..n {
            z[j] -= &r[j];
        }
        z[width] -= &r[width];
    }
    rows.push(z);
    let mut basis: Vec<usize> = (n..width).collect();
    while let Some(col) = (0..width).find(|&j| rows[m][j].is_negative()) {
        let mut best: Option<(usize, Q)> = None;
        for i in 0..m {
            if rows[i][col].is_positive() {
                let ratio = &rows[i][width] / &rows[i][col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let (row, _) = best.expect("phase one is bounded below");
        pivot_rows(&mut rows, row, col);
        basis[row] = col;
    }
    let z = rows.pop().expect("objective row");
    if z[width].is_negative() {
        // Optimal artificial sum is -z[width] > 0. The duals are
        // y_i = 1 - (reduced cost of artificial i).
        let y = (0..m)
            .map(|i| {
                let yi = Q::one() - &z[n + i];
                if flip[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        return Err(y);
    }
    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are redundant.
    let mut keep = Vec::new();
    for i in 0..m {
        if basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| !rows[i][j].is_zero()) {
                pivot_rows(&mut rows, i, col);
                basis[i] = col;
                keep.push(i);
            }
        } else {
            keep.push(i);
        }
    }
    let rows = keep
        .iter()
        .map(|&i| {
            let mut r = rows[i][..n].to_vec();
            r.push(rows[i][width].clone());
            r
        })
        .collect();
    let basis = keep.iter().map(|&i| basis[i]).collect();
    Ok(Tableau { rows, basis, columns: n })
}

/// All vertices of `{x : Ax = b, x >= 0}` reachable by feasible pivots from
/// `start` (the feasible-basis graph is connected, so this is all of them).
/// Gives up with `None` after `max_bases` distinct bases.
pub fn enumerate_vertices(start: Tableau, max_bases: usize) -> Option<Vec<Vec<Q>>> {
    let n = start.columns;
    let key = |t: &Tableau| {
        let mut k = t.basis.clone();
        k.sort_unstable();
        k
    };
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut vertices: BTreeSet<Vec<Q>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(key(&start));
    queue.push_back(start);
    while let Some(t) = queue.pop_front() {
        vertices.insert(t.vertex());
        for col in 0..n {
            if t.basis.contains(&col) {
                continue;
            }
            let ratios: Vec<(usize, Q)> = t
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col].is_positive())
                .map(|(i, r)| (i, &r[n] / &r[col]))
                .collect();
            let Some(min) = ratios.iter().map(|(_, q)| q).min().cloned() else { continue };
            for (row, _) in ratios.into_iter().filter(|(_, q)| *q == min) {
                let mut next = t.clone();
                next.pivot(row, col);
                if seen.insert(key(&next)) {
                    if seen.len() > max_bases {
                        return None;
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Some(vertices.into_iter().collect())
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::radical::rational;

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| rational(x, 1)).collect()
    }

    #[test]
    fn rref_rank_and_null_space() {
        let a = vec![qv(&[1, 2, 3]), qv(&[2, 4, 6]), qv(&[1, 0, 1])];
        let b = qv(&[1, 2, 0]);
        let r = rref(&a, &b);
        assert_eq!(r.rank(), 2);
        assert!(r.inconsistency.is_none());
        for v in r.null_basis() {
            for row in &a {
                let s: Q = row.iter().zip(&v).map(|(x, y)| x * y).sum();
                assert!(s.is_zero());
            }
        }
        let r = rref(&a, &qv(&[1, 3, 0]));
        let y = r.inconsistency.expect("inconsistent");
        for c in 0..3 {
            let s: Q = (0..3).map(|i| &y[i] * &a[i][c]).sum();
            assert!(s.is_zero());
        }
        let s: Q = (0..3).map(|i| &y[i] * &qv(&[1, 3, 0])[i]).sum();
        assert!(!s.is_zero());
    }

    #[test]
    fn simplex_feasible_and_vertices_of_a_square() {
        // x0 + x1 = 1, x2 + x3 = 1: a square with four vertices
        let a = vec![qv(&[1, 1, 0, 0]), qv(&[0, 0, 1, 1])];
        let b = qv(&[1, 1]);
        let t = phase_one(&a, &b).unwrap();
        let vs = enumerate_vertices(t, 1000).unwrap();
        assert_eq!(vs.len(), 4);
    }

    #[test]
    fn simplex_farkas_certificate() {
        // x0 + x1 = 1, x0 + x1 = -1 has no nonnegative solution; so does
        // x0 - x1 = 0, x0 + x1 = 1, x0 = 2.
        for (a, b) in [
            (vec![qv(&[1, 1]), qv(&[1, 1])], qv(&[1, -1])),
            (vec![qv(&[1, -1]), qv(&[1, 1]), qv(&[1, 0])], qv(&[0, 1, 2])),
        ] {
            let y = phase_one(&a, &b).unwrap_err();
            for c in 0..2 {
                let s: Q = (0..a.len()).map(|i| &y[i] * &a[i][c]).sum();
                assert!(!s.is_positive());
            }
            let s: Q = (0..a.len()).map(|i| &y[i] * &b[i]).sum();
            assert!(s.is_positive());
        }
    }

    #[test]
    fn redundant_rows_removed() {
        let a = vec![qv(&[1, 1, 1]), qv(&[2, 2, 2]), qv(&[1, 0, -1])];
        let b = qv(&[1, 2, 0]);
        let t = phase_one(&a, &b).unwrap();
        assert_eq!(t.rows.len(), 2);
        let vs = enumerate_vertices(t, 1000).unwrap();
        // vertices: (1/2, 0, 1/2) and (0, 1, 0)
        assert_eq!(vs.len(), 2);
    }
}
