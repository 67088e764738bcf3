//! Truncated Jacobian algebras `kQ/(I + m^o)`.

use std::collections::HashMap;

use crate::field::Coeff;
use crate::linalg::{EchelonBasis, SparseVec};
use crate::ncseries::{GradedQuiver, Path, Series, VertexId};

use super::{QpError, Qp};

/// The algebra `kQ/(I + m^o)` with `I` generated by the cyclic derivatives:
/// paths of length `< o` modulo the two-sided ideal.
#[derive(Clone, Debug)]
pub struct JacobianQuotient<K> {
    quiver: GradedQuiver,
    order: usize,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
    ideal: EchelonBasis<K>,
}

impl<K: Coeff> JacobianQuotient<K> {
    /// Builds the quotient at order `o`. Needs `o <= watermark`.
    pub fn new(q: &Qp<K>, o: usize) -> Result<Self, QpError> {
        let available = q.watermark();
        if o > available {
            return Err(QpError::InsufficientTruncation { requested: o, available });
        }
        let gens: Vec<Series<K>> = if o >= 1 {
            q.derivatives().into_iter().map(|d| d.with_order(o - 1)).collect()
        } else {
            Vec::new()
        };
        Ok(Self::from_relations(q.quiver(), o, gens))
    }

    /// The quotient of `kQ/m^o` by the two-sided ideal generated by `relations`.
    pub fn from_relations(quiver: &GradedQuiver, o: usize, relations: Vec<Series<K>>) -> Self {
        let paths = if o == 0 { Vec::new() } else { quiver.paths_up_to(o - 1) };
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let mut j = JacobianQuotient { quiver: quiver.clone(), order: o, paths, index, ideal: EchelonBasis::new() };
        if o == 0 {
            return j;
        }
        let mut queue: Vec<SparseVec<K>> = Vec::new();
        for r in relations {
            let v = j.vector(&r.with_order(o - 1));
            let red = j.ideal.reduce_leading(v);
            if !red.is_empty() && j.ideal.insert(red.clone()) {
                queue.push(red);
            }
        }
        let arrows: Vec<Path> = quiver.arrow_ids().map(|a| quiver.arrow_path(a)).collect();
        while let Some(v) = queue.pop() {
            let s = j.series(&v);
            for a in &arrows {
                for prod in [s.left_mul_path(a), s.right_mul_path(a)] {
                    if prod.is_zero() {
                        continue;
                    }
                    let w = j.ideal.reduce_leading(j.vector(&prod));
                    if !w.is_empty() && j.ideal.insert(w.clone()) {
                        queue.push(w);
                    }
                }
            }
        }
        j
    }

    pub fn quiver(&self) -> &GradedQuiver {
        &self.quiver
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.paths.len() - self.ideal.rank()
    }

    /// Dimension of `e_t A e_s`.
    pub fn dim_block(&self, s: VertexId, t: VertexId) -> usize {
        let total = self.paths.iter().filter(|p| p.source() == s && p.target() == t).count();
        let rank = self.ideal.pivots().filter(|&i| self.paths[i].source() == s && self.paths[i].target() == t).count();
        total - rank
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path_index(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Coordinates of a series in the path basis, dropping lengths `>= o`.
    pub fn vector(&self, s: &Series<K>) -> SparseVec<K> {
        crate::linalg::sparse_from(s.terms().filter_map(|(p, c)| self.index.get(p).map(|&i| (i, c.clone()))))
    }

    pub fn series(&self, v: &SparseVec<K>) -> Series<K> {
        Series::from_terms(self.order.saturating_sub(1), v.iter().map(|(i, c)| (self.paths[*i].clone(), c.clone())))
    }

    /// Normal form modulo the ideal; two series agree in `A` iff normal forms agree.
    pub fn normal_form(&self, v: SparseVec<K>) -> SparseVec<K> {
        self.ideal.reduce_full(v)
    }

    pub fn ideal(&self) -> &EchelonBasis<K> {
        &self.ideal
    }

    /// Indices of paths that are not pivots of the ideal: a basis of `A`.
    pub fn basis_indices(&self) -> Vec<usize> {
        let piv: std::collections::HashSet<usize> = self.ideal.pivots().collect();
        (0..self.paths.len()).filter(|i| !piv.contains(i)).collect()
    }
}

/// `dim kQ/(I + m^o)` for each `o` in `orders`.
pub fn jacobian_dims<K: Coeff>(q: &Qp<K>, orders: std::ops::RangeInclusive<usize>) -> Result<Vec<usize>, QpError> {
    orders.map(|o| JacobianQuotient::new(q, o).map(|j| j.dim())).collect()
}

/// Checks that the closure-built ideal equals the span of all products
/// `u·∂_aW·v` truncated below `o`, enumerated explicitly.
pub fn jacobian_ideal_is_closed<K: Coeff>(q: &Qp<K>, o: usize) -> Result<bool, QpError> {
    let j = JacobianQuotient::new(q, o)?;
    if o == 0 {
        return Ok(true);
    }
    let quiver = q.quiver();
    let paths = quiver.paths_up_to(o - 1);
    let mut naive = EchelonBasis::new();
    for (a, d) in quiver.arrow_ids().zip(q.derivatives()) {
        let r = d.with_order(o - 1);
        let (s, t) = (quiver.source(a), quiver.target(a));
        for v in paths.iter().filter(|v| v.target() == t) {
            let rv = r.right_mul_path(v);
            if rv.is_zero() {
                continue;
            }
            for u in paths.iter().filter(|u| u.source() == s) {
                let urv = rv.left_mul_path(u);
                if !urv.is_zero() {
                    naive.insert(j.vector(&urv));
                }
            }
        }
    }
    Ok(naive.rank() == j.ideal().rank() && naive.rows().all(|r| j.ideal().contains(r.clone())))
}
