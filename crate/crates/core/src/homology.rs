//! Homology of length-filtered cochain complexes with exact ranks.
//!
//! A complex is given by cells (basis vectors) per cohomological degree, each
//! carrying a length, and the differential of every cell in coordinates of the
//! next degree. The differential must not decrease length. From one complex
//! built at truncation `n` (cells of length `< n`) the homology of every lower
//! truncation `k <= n` is obtained by discarding cells of length `>= k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::field::Coeff;
use crate::linalg::{EchelonBasis, SparseVec};

#[derive(Clone, Debug, Default)]
pub struct GradedPiece<K> {
    pub lengths: Vec<usize>,
    pub diff: Vec<SparseVec<K>>,
}

#[derive(Clone, Debug)]
pub struct FilteredComplex<K> {
    pieces: BTreeMap<i32, GradedPiece<K>>,
    order: usize,
}

impl<K: Coeff> FilteredComplex<K> {
    /// `order` is the truncation `n`: every cell has length `< n`.
    pub fn new(order: usize) -> Self {
        FilteredComplex { pieces: BTreeMap::new(), order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn insert_piece(&mut self, degree: i32, piece: GradedPiece<K>) {
        assert_eq!(piece.lengths.len(), piece.diff.len());
        self.pieces.insert(degree, piece);
    }

    pub fn piece(&self, degree: i32) -> Option<&GradedPiece<K>> {
        self.pieces.get(&degree)
    }

    /// Number of cells of degree `p` and length `< k`.
    pub fn dim(&self, p: i32, k: usize) -> usize {
        self.pieces.get(&p).map_or(0, |pc| pc.lengths.iter().filter(|&&l| l < k).count())
    }

    fn dim_range(&self, p: i32, lo: usize, k: usize) -> usize {
        self.pieces.get(&p).map_or(0, |pc| pc.lengths.iter().filter(|&&l| lo <= l && l < k).count())
    }

    /// Rank of `d^p` restricted to cells with length in `lo..k`, keeping
    /// entries of length `< k`.
    fn rank(&self, p: i32, lo: usize, k: usize) -> usize {
        let (Some(src), Some(dst)) = (self.pieces.get(&p), self.pieces.get(&(p + 1))) else {
            return 0;
        };
        let mut basis = EchelonBasis::new();
        for (len, img) in src.lengths.iter().zip(&src.diff) {
            if *len < lo || *len >= k {
                continue;
            }
            let v: SparseVec<K> = img.iter().filter(|(j, _)| dst.lengths[*j] < k).cloned().collect();
            if !v.is_empty() {
                basis.insert(v);
            }
        }
        basis.rank()
    }

    /// `dim H^p` of the truncation at `k`.
    pub fn homology(&self, p: i32, k: usize) -> usize {
        self.dim(p, k) - self.rank(p, 0, k) - self.rank(p - 1, 0, k)
    }

    /// Dimension of the image of `H^p(C_k) -> H^p(C_m)` for `m <= k`: the
    /// classes supported in lengths `< m` that survive from truncation `k`.
    pub fn interior_homology(&self, p: i32, k: usize, m: usize) -> usize {
        assert!(m <= k);
        let za = self.dim(p, k) - self.rank(p, 0, k);
        let zk = self.dim_range(p, m, k) - self.rank(p, m, k);
        za - zk - self.rank(p - 1, 0, m)
    }

    /// Homology dimensions for the given degrees and truncations, computed in
    /// parallel. With `window = Some(h)` the value at order `k` is the image
    /// in truncation `k - h`.
    pub fn table(&self, degrees: &[i32], orders: &[usize], window: Option<usize>) -> BTreeMap<(i32, usize), usize> {
        let jobs: Vec<(i32, usize)> = degrees.iter().flat_map(|&p| orders.iter().map(move |&k| (p, k))).collect();
        jobs.par_iter()
            .map(|&(p, k)| {
                let d = match window {
                    Some(h) => self.interior_homology(p, k, k.saturating_sub(h)),
                    None => self.homology(p, k),
                };
                ((p, k), d)
            })
            .collect()
    }
}

/// Homology dimensions keyed by cohomological degree and truncation order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyTable {
    pub degrees: Vec<i32>,
    pub orders: Vec<usize>,
    /// `dims[r][c]` is the dimension in degree `degrees[r]` at order `orders[c]`.
    pub dims: Vec<Vec<usize>>,
}

impl HomologyTable {
    pub fn from_map(degrees: Vec<i32>, orders: Vec<usize>, map: &BTreeMap<(i32, usize), usize>) -> Self {
        let dims = degrees.iter().map(|p| orders.iter().map(|k| map[&(*p, *k)]).collect()).collect();
        HomologyTable { degrees, orders, dims }
    }

    pub fn get(&self, p: i32, k: usize) -> Option<usize> {
        let r = self.degrees.iter().position(|&x| x == p)?;
        let c = self.orders.iter().position(|&x| x == k)?;
        Some(self.dims[r][c])
    }

    /// The row of a degree, in order of `orders`.
    pub fn row(&self, p: i32) -> Option<&[usize]> {
        let r = self.degrees.iter().position(|&x| x == p)?;
        Some(&self.dims[r])
    }

    /// Aligned text table, degrees down the side and orders across.
    pub fn to_text(&self) -> String {
        let width = self.dims.iter().flatten().map(|d| d.to_string().len()).max().unwrap_or(1).max(3);
        let mut s = format!("{:>6}", "H^p");
        for k in &self.orders {
            s.push_str(&format!(" {:>width$}", format!("n={k}")));
        }
        for (p, row) in self.degrees.iter().zip(&self.dims) {
            s.push('\n');
            s.push_str(&format!("{p:>6}"));
            for d in row {
                s.push_str(&format!(" {d:>width$}"));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    /// k[x]/x^n as a complex: degree -1 spanned by x^j, degree 0 by x^j,
    /// d = multiplication by x.
    fn mult_by_x(n: usize) -> FilteredComplex<Rational> {
        let mut c = FilteredComplex::new(n);
        let lengths: Vec<usize> = (0..n).collect();
        let diff = (0..n).map(|j| if j + 1 < n { vec![(j + 1, r(1))] } else { vec![] }).collect();
        c.insert_piece(-1, GradedPiece { lengths: lengths.clone(), diff });
        c.insert_piece(0, GradedPiece { lengths, diff: vec![vec![]; n] });
        c
    }

    #[test]
    fn truncation_creates_spurious_classes() {
        let c = mult_by_x(5);
        // kernel x^(n-1) and cokernel 1 at every truncation
        for k in 1..=5 {
            assert_eq!(c.homology(-1, k), 1);
            assert_eq!(c.homology(0, k), 1);
        }
        // the kernel class sits at the top length and is not interior
        for k in 2..=5 {
            assert_eq!(c.interior_homology(-1, k, k - 1), 0);
            assert_eq!(c.interior_homology(0, k, k - 1), 1);
        }
    }

    #[test]
    fn table_layout() {
        let c = mult_by_x(3);
        let m = c.table(&[-1, 0], &[1, 2, 3], None);
        let t = HomologyTable::from_map(vec![-1, 0], vec![1, 2, 3], &m);
        assert_eq!(t.get(0, 2), Some(1));
        assert_eq!(t.row(-1), Some(&[1, 1, 1][..]));
        assert!(t.to_text().contains("n=3"));
    }
}
