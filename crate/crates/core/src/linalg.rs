//! Exact linear algebra over the rationals.
//!
//! Dense routines work on `Vec<Vec<Q>>` row-major matrices and are meant for
//! the small systems that show up in cone and weight computations. The
//! sparse [`Echelon`] is used for truncated ideals and graded pieces, where
//! vectors are indexed by monomials.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::arith::{q, Q};

pub type Matrix = Vec<Vec<Q>>;

pub fn from_i64_rows(rows: &[Vec<i64>]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
}

/// Reduced row echelon form. Returns the reduced matrix and pivot columns.
pub fn rref(mut m: Matrix, ncols: usize) -> (Matrix, Vec<usize>) {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(p) = (row..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let factor = r[col].clone();
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = &*x - &factor * y;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (m, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    let ncols = m.first().map_or(0, |r| r.len());
    rref(m.clone(), ncols).1.len()
}

pub fn rank_i64(rows: &[Vec<i64>]) -> usize {
    rank(&from_i64_rows(rows))
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &Matrix, ncols: usize) -> Vec<Vec<Q>> {
    let (r, pivots) = rref(m.clone(), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `m x = b`, or `None` when inconsistent.
pub fn solve(m: &Matrix, b: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][ncols].clone();
    }
    Some(x)
}

/// The unique solution of a square system, if the matrix is invertible.
pub fn solve_unique(m: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) || rank(m) != n {
        return None;
    }
    solve(m, b, n)
}

pub fn det(m: &Matrix) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        d *= &a[col][col];
        let inv = a[col][col].recip();
        for i in col + 1..n {
            if a[i][col].is_zero() {
                continue;
            }
            let factor = &a[i][col] * &inv;
            for j in col..n {
                let t = &factor * &a[col][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

pub fn det_i64(rows: &[Vec<i64>]) -> i64 {
    let d = det(&from_i64_rows(rows));
    crate::arith::q_to_i64(&d).expect("integer determinant")
}

pub fn transpose(m: &Matrix, ncols: usize) -> Matrix {
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &Matrix, v: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|r| r.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

pub type SparseVec = BTreeMap<usize, Q>;

fn axpy(target: &mut SparseVec, factor: &Q, row: &SparseVec) {
    for (&c, v) in row {
        let entry = target.entry(c).or_insert_with(Q::zero);
        *entry -= factor * v;
        if entry.is_zero() {
            target.remove(&c);
        }
    }
}

/// Incremental row echelon form over sparse vectors.
///
/// Each stored row has its pivot at its largest column index, so reducing a
/// vector from the top column downwards never reintroduces a pivot column.
/// The residue of a reduction is the unique representative supported on
/// non-pivot columns. Optionally tracks, for every row, the combination of
/// inserted generators it came from.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, (SparseVec, SparseVec)>,
    track: bool,
    inserted: usize,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_provenance() -> Self {
        Echelon {
            track: true,
            ..Self::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Reduces `v`; returns the residue and (if tracking) the combination of
    /// generators that was subtracted, so `v = residue + sum combo_i * gen_i`.
    pub fn reduce_with_combo(&self, v: &SparseVec) -> (SparseVec, SparseVec) {
        let mut v = v.clone();
        let mut combo = SparseVec::new();
        let mut cursor = usize::MAX;
        loop {
            let Some((&c, coef)) = v.range(..=cursor).next_back() else {
                break;
            };
            if let Some((row, rc)) = self.rows.get(&c) {
                let factor = coef.clone();
                axpy(&mut v, &factor, row);
                if self.track {
                    for (&g, x) in rc {
                        let e = combo.entry(g).or_insert_with(Q::zero);
                        *e += &factor * x;
                        if e.is_zero() {
                            combo.remove(&g);
                        }
                    }
                }
            }
            if c == 0 {
                break;
            }
            cursor = c - 1;
        }
        (v, combo)
    }

    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        self.reduce_with_combo(v).0
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts a generator; returns whether the rank grew. Generators are
    /// numbered in insertion order for provenance.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let id = self.inserted;
        self.inserted += 1;
        let (mut r, combo) = self.reduce_with_combo(&v);
        let Some((&pivot, lead)) = r.iter().next_back() else {
            return false;
        };
        let inv = lead.recip();
        for x in r.values_mut() {
            *x *= &inv;
        }
        let mut rc = SparseVec::new();
        if self.track {
            // row = (v - combo·gens) / lead
            rc.insert(id, inv.clone());
            for (g, x) in combo {
                rc.insert(g, -x * &inv);
            }
        }
        self.rows.insert(pivot, (r, rc));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qr;

    fn sv(pairs: &[(usize, i64)]) -> SparseVec {
        pairs.iter().map(|&(c, v)| (c, q(v))).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let m = from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(&m), 2);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&m, &ns[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn determinant() {
        assert_eq!(det_i64(&[vec![1, 0], vec![3, 2]]), 2);
        assert_eq!(det_i64(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_i64(&[vec![2, 1, 0], vec![1, 2, 0], vec![0, 1, 2]]), 6);
        let m = vec![vec![qr(1, 2), qr(1, 3)], vec![q(1), q(1)]];
        assert_eq!(det(&m), qr(1, 6));
    }

    #[test]
    fn solve_systems() {
        let m = from_i64_rows(&[vec![2, 1], vec![1, 2]]);
        let x = solve_unique(&m, &[q(1), q(1)]).unwrap();
        assert_eq!(x, vec![qr(1, 3), qr(1, 3)]);
        let sing = from_i64_rows(&[vec![1, 1], vec![2, 2]]);
        assert!(solve(&sing, &[q(1), q(3)], 2).is_none());
        assert!(solve_unique(&sing, &[q(1), q(2)]).is_none());
    }

    #[test]
    fn echelon_membership_and_provenance() {
        let mut e = Echelon::with_provenance();
        assert!(e.insert(sv(&[(0, 1), (2, 1)])));
        assert!(e.insert(sv(&[(1, 1), (2, 1)])));
        assert!(!e.insert(sv(&[(0, 1), (1, -1)])));
        let target = sv(&[(0, 2), (1, 1), (2, 3)]);
        let (res, combo) = e.reduce_with_combo(&target);
        assert!(res.is_empty());
        // rebuild target from generators
        let gens = [sv(&[(0, 1), (2, 1)]), sv(&[(1, 1), (2, 1)])];
        let mut rebuilt = SparseVec::new();
        for (g, c) in &combo {
            for (col, v) in &gens[*g] {
                *rebuilt.entry(*col).or_insert_with(Q::zero) += c * v;
            }
        }
        rebuilt.retain(|_, v| !v.is_zero());
        assert_eq!(rebuilt, target);
        // column 0 is never a pivot, so the residue of e0 is itself
        assert_eq!(e.reduce(&sv(&[(0, 1)])), sv(&[(0, 1)]));
    }
}
