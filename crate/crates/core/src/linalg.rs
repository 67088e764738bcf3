//! Exact sparse linear algebra: incremental echelon bases, ranks, inverses.

use std::collections::HashMap;

use crate::field::Coeff;

/// Sparse vector as `(index, value)` pairs, strictly increasing in index, no zeros.
pub type SparseVec<K> = Vec<(usize, K)>;

/// Builds a sparse vector from unsorted entries, summing duplicates.
pub fn sparse_from<K: Coeff>(entries: impl IntoIterator<Item = (usize, K)>) -> SparseVec<K> {
    let mut map: HashMap<usize, K> = HashMap::new();
    for (i, v) in entries {
        match map.get_mut(&i) {
            Some(x) => *x = x.add(&v),
            None => {
                map.insert(i, v);
            }
        }
    }
    let mut out: SparseVec<K> = map.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    out.sort_unstable_by_key(|(i, _)| *i);
    out
}

/// `a + c·b`
fn axpy<K: Coeff>(a: &[(usize, K)], c: &K, b: &[(usize, K)]) -> SparseVec<K> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c.mul(&b[j].1)));
            j += 1;
        } else {
            let mut v = a[i].1.clone();
            v.add_mul_assign(c, &b[j].1);
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row echelon basis built one vector at a time. Each stored row is monic at
/// its leading index and no two rows share a leading index.
#[derive(Clone, Debug)]
pub struct EchelonBasis<K> {
    rows: HashMap<usize, SparseVec<K>>,
}

impl<K: Coeff> Default for EchelonBasis<K> {
    fn default() -> Self {
        EchelonBasis { rows: HashMap::new() }
    }
}

impl<K: Coeff> EchelonBasis<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` until its leading index is not a pivot (or it vanishes).
    pub fn reduce_leading(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        let mut pos = 0;
        while pos < v.len() {
            let (col, ref c) = v[pos];
            match self.rows.get(&col) {
                Some(row) => {
                    let c = c.neg();
                    v = axpy(&v, &c, row);
                }
                None => pos += 1,
            }
            if pos > 0 {
                break;
            }
        }
        v
    }

    /// Fully reduces `v` against the basis (every pivot index cleared).
    pub fn reduce_full(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        let mut pos = 0;
        while pos < v.len() {
            let (col, ref c) = v[pos];
            match self.rows.get(&col) {
                Some(row) => {
                    let c = c.neg();
                    v = axpy(&v, &c, row);
                }
                None => pos += 1,
            }
        }
        v
    }

    pub fn contains(&self, v: SparseVec<K>) -> bool {
        self.reduce_leading(v).is_empty()
    }

    /// Inserts `v`; returns true when it was independent of the basis.
    pub fn insert(&mut self, v: SparseVec<K>) -> bool {
        let v = self.reduce_leading(v);
        let Some((lead, c)) = v.first().cloned() else {
            return false;
        };
        let inv = c.inv().expect("nonzero pivot is invertible");
        let row = if inv.is_one() { v } else { v.into_iter().map(|(i, x)| (i, x.mul(&inv))).collect() };
        self.rows.insert(lead, row);
        true
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec<K>> + '_ {
        self.rows.values()
    }
}

/// Rank of a list of sparse rows.
pub fn rank<K: Coeff>(rows: impl IntoIterator<Item = SparseVec<K>>) -> usize {
    let mut b = EchelonBasis::new();
    for r in rows {
        b.insert(r);
    }
    b.rank()
}

/// Inverse of a dense square matrix, or `None` when singular.
pub fn invert<K: Coeff>(m: &[Vec<K>]) -> Option<Vec<Vec<K>>> {
    let n = m.len();
    let mut a: Vec<Vec<K>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { K::one() } else { K::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].inv()?;
        for x in a[col].iter_mut() {
            *x = x.mul(&inv);
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].neg();
                for (x, p) in row.iter_mut().zip(&prow) {
                    x.add_mul_assign(&f, p);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Dense matrix product.
pub fn mat_mul<K: Coeff>(a: &[Vec<K>], b: &[Vec<K>]) -> Vec<Vec<K>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = K::zero();
                    for k in 0..inner {
                        s.add_mul_assign(&row[k], &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Fp, Rational};

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![
            sparse_from([(0, r(1)), (1, r(2))]),
            sparse_from([(1, r(1)), (2, r(1))]),
            sparse_from([(0, r(1)), (1, r(3)), (2, r(1))]),
        ];
        assert_eq!(rank(rows), 2);
    }

    #[test]
    fn rank_depends_on_field() {
        let rows_q = vec![sparse_from([(0, r(1)), (1, r(1))]), sparse_from([(0, r(1)), (1, r(-1))])];
        assert_eq!(rank(rows_q), 2);
        type F2 = Fp<2>;
        let rows_2 = vec![
            sparse_from([(0, F2::from_i64(1)), (1, F2::from_i64(1))]),
            sparse_from([(0, F2::from_i64(1)), (1, F2::from_i64(-1))]),
        ];
        assert_eq!(rank(rows_2), 1);
    }

    #[test]
    fn membership() {
        let mut b = EchelonBasis::new();
        b.insert(sparse_from([(1, r(1)), (3, r(1))]));
        b.insert(sparse_from([(3, r(2))]));
        assert!(b.contains(sparse_from([(1, r(5))])));
        assert!(!b.contains(sparse_from([(2, r(1))])));
        assert!(b.reduce_full(sparse_from([(1, r(1)), (2, r(1)), (3, r(7))])) == sparse_from([(2, r(1))]));
    }

    #[test]
    fn dense_inverse() {
        let m = vec![vec![r(2), r(1)], vec![r(1), r(1)]];
        let inv = invert(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), vec![vec![r(1), r(0)], vec![r(0), r(1)]]);
        assert!(invert(&[vec![r(1), r(2)], vec![r(2), r(4)]]).is_none());
    }
}
