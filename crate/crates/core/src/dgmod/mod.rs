//! Finite-rank dg modules over a truncated Ginzburg algebra.
//!
//! A [`TwistedComplex`] is `⊕_g Σ^{s_g} P_{v_g}` with `P_v = e_v Γ`, so the
//! generator `e_g` sits in degree `-s_g`. Its differential is
//! `d(e_g x) = Σ_u e_u δ_{ug} x + (-1)^{s_g} e_g d(x)`, where the entry
//! `δ_{ug}` is a series from `v_g` to `v_u` of degree `s_u - s_g + 1`.

mod bimodule;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::field::Coeff;
use crate::ginzburg::GinzburgAlgebra;
use crate::homology::{FilteredComplex, GradedPiece};
use crate::ncseries::{cyclic_derivative, Path, Series, VertexId};
use crate::Error;

pub use bimodule::{phi_interval, BimoduleData, BimoduleReport, IdentityCheck, PhiInterval};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub vertex: VertexId,
    pub shift: i32,
    pub label: String,
}

impl Generator {
    pub fn new(vertex: VertexId, shift: i32, label: impl Into<String>) -> Self {
        Generator { vertex, shift, label: label.into() }
    }

    pub fn degree(&self) -> i32 {
        -self.shift
    }
}

/// A sparse matrix of series; entry `(u, g)` is the component from generator
/// `g` to generator `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<K> {
    rows: usize,
    cols: usize,
    order: usize,
    entries: BTreeMap<(usize, usize), Series<K>>,
}

impl<K: Coeff> Matrix<K> {
    pub fn zero(rows: usize, cols: usize, order: usize) -> Self {
        Matrix { rows, cols, order, entries: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, u: usize, g: usize) -> Option<&Series<K>> {
        self.entries.get(&(u, g))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Series<K>)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `s` to entry `(u, g)`.
    pub fn add_entry(&mut self, u: usize, g: usize, s: &Series<K>) {
        assert!(u < self.rows && g < self.cols);
        let s = s.with_order(self.order);
        let e = self.entries.entry((u, g)).or_insert_with(|| Series::zero(s.order()));
        e.add_scaled(&s, &K::one()).expect("same order");
        if e.is_zero() {
            self.entries.remove(&(u, g));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(u, g), s) in &other.entries {
            out.add_entry(u, g, s);
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        let mut out = Matrix::zero(self.rows, self.cols, self.order);
        for (&(u, g), s) in &self.entries {
            out.add_entry(u, g, &s.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&K::one().neg())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// `self ∘ other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut by_row: HashMap<usize, Vec<(usize, &Series<K>)>> = HashMap::new();
        for (&(u, g), s) in &other.entries {
            by_row.entry(u).or_default().push((g, s));
        }
        let mut out = Matrix::zero(self.rows, other.cols, self.order);
        for (&(w, u), a) in &self.entries {
            for &(g, b) in by_row.get(&u).into_iter().flatten() {
                out.add_entry(w, g, &a.mul_into_order(b, self.order));
            }
        }
        out
    }

    /// Entrywise map, dropping entries that become zero.
    pub fn map(&self, f: impl Fn(usize, usize, &Series<K>) -> Series<K>) -> Self {
        let mut out = Matrix::zero(self.rows, self.cols, self.order);
        for (&(u, g), s) in &self.entries {
            out.add_entry(u, g, &f(u, g, s));
        }
        out
    }

    /// Keeps paths of length at most `m`.
    pub fn truncate(&self, m: usize) -> Self {
        let mut out = Matrix::zero(self.rows, self.cols, m);
        for (&(u, g), s) in &self.entries {
            out.add_entry(u, g, &s.truncate(m));
        }
        out
    }

    /// Longest path in any entry.
    pub fn max_len(&self) -> Option<usize> {
        self.entries.values().filter_map(Series::max_len).max()
    }
}

/// `⊕_g Σ^{s_g} P_{v_g}` with a twisted differential.
#[derive(Clone, Debug)]
pub struct TwistedComplex<K> {
    algebra: Arc<GinzburgAlgebra<K>>,
    generators: Vec<Generator>,
    delta: Matrix<K>,
}

impl<K: Coeff> TwistedComplex<K> {
    /// Checks endpoints and degrees of every entry. The Maurer–Cartan
    /// equation is checked separately by [`TwistedComplex::maurer_cartan_defect`].
    pub fn new(algebra: Arc<GinzburgAlgebra<K>>, generators: Vec<Generator>, delta: Matrix<K>) -> Result<Self, Error> {
        let n = generators.len();
        if delta.rows() != n || delta.cols() != n {
            return Err(Error::Invalid(format!("differential is {}x{} for {n} generators", delta.rows(), delta.cols())));
        }
        if delta.order() != algebra.order() {
            return Err(Error::Invalid("differential order differs from the algebra".into()));
        }
        for (&(u, g), s) in delta.entries() {
            let (gu, gg) = (&generators[u], &generators[g]);
            if !s.is_homogeneous(gg.vertex, gu.vertex, gu.shift - gg.shift + 1) {
                return Err(Error::Invalid(format!("entry {} <- {} is not homogeneous of the right degree", gu.label, gg.label)));
            }
        }
        Ok(TwistedComplex { algebra, generators, delta })
    }

    /// The free module `P_v`.
    pub fn projective(algebra: Arc<GinzburgAlgebra<K>>, v: VertexId) -> Self {
        let label = format!("P{}", algebra.quiver().vertex_name(v));
        let order = algebra.order();
        TwistedComplex { algebra, generators: vec![Generator::new(v, 0, label)], delta: Matrix::zero(1, 1, order) }
    }

    pub fn algebra(&self) -> &Arc<GinzburgAlgebra<K>> {
        &self.algebra
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn delta(&self) -> &Matrix<K> {
        &self.delta
    }

    pub fn shifts(&self) -> Vec<i32> {
        self.generators.iter().map(|g| g.shift).collect()
    }

    /// `(-1)^{s_u} d(F_{ug})` for every entry of `f`, with `u` a generator
    /// of `self`.
    pub fn signed_d(&self, f: &Matrix<K>) -> Matrix<K> {
        f.map(|u, _, s| {
            let ds = self.algebra.apply_d(s);
            if self.generators[u].shift % 2 == 0 {
                ds
            } else {
                ds.neg()
            }
        })
    }

    /// `δδ + (-1)^{s_u} d(δ)`; zero exactly when `d² = 0` on the module.
    pub fn maurer_cartan_defect(&self) -> Matrix<K> {
        self.delta.mul(&self.delta).add(&self.signed_d(&self.delta))
    }

    pub fn is_maurer_cartan(&self) -> bool {
        self.maurer_cartan_defect().is_zero()
    }

    /// `d_Λ(F) = δF + (-1)^{s_u} d(F) - (-1)^{|F|} Fδ` for an endomorphism
    /// `F` of degree `degree`.
    pub fn d_lambda(&self, f: &Matrix<K>, degree: i32) -> Matrix<K> {
        let fd = f.mul(&self.delta);
        let fd = if degree % 2 == 0 { fd.neg() } else { fd };
        self.delta.mul(f).add(&self.signed_d(f)).add(&fd)
    }

    /// The mapping cone of a closed degree-0 map `f: source → target`, with
    /// generators of `target` first and those of `Σ source` after.
    pub fn cone(source: &Self, target: &Self, f: &Matrix<K>) -> Result<Self, Error> {
        let (m, n) = (source.generators.len(), target.generators.len());
        if f.rows() != n || f.cols() != m {
            return Err(Error::Invalid("map size does not match the complexes".into()));
        }
        let mut gens = target.generators.clone();
        gens.extend(source.generators.iter().map(|g| Generator::new(g.vertex, g.shift + 1, format!("Σ{}", g.label))));
        let mut delta = Matrix::zero(n + m, n + m, target.delta.order());
        for (&(u, g), s) in target.delta.entries() {
            delta.add_entry(u, g, s);
        }
        for (&(u, g), s) in f.entries() {
            delta.add_entry(u, n + g, s);
        }
        for (&(u, g), s) in source.delta.entries() {
            delta.add_entry(n + u, n + g, &s.neg());
        }
        TwistedComplex::new(target.algebra.clone(), gens, delta)
    }

    /// Homology of `M ⊗ Γ/mⁿ`.
    ///
    /// The differential raises path length by at most `h` (the longest
    /// entry of `δ`, or of `d` on `Γ`), so truncation at `n` can only create
    /// classes in lengths `>= n - h`. The interior dims are the images of
    /// the truncated homology in lengths `< n - h`.
    pub fn homology(&self, n: usize) -> Result<ModuleHomology, Error> {
        let hi = self.generators.iter().map(Generator::degree).max().unwrap_or(0);
        let lo = self.generators.iter().map(Generator::degree).min().unwrap_or(0) - 3;
        self.homology_in(n, lo..=hi)
    }

    pub fn homology_in(&self, n: usize, degrees: std::ops::RangeInclusive<i32>) -> Result<ModuleHomology, Error> {
        if n > self.algebra.exact_length() + 1 {
            return Err(Error::InsufficientTruncation {
                requested: n,
                needed: n - 1,
                available: self.algebra.exact_length(),
            });
        }
        let (lo, hi) = (*degrees.start(), *degrees.end());
        let smin = self.generators.iter().map(|g| g.shift).min().unwrap_or(0);
        let paths = self.algebra.paths_above(n, lo - 1 + smin);
        let mut by_target: HashMap<VertexId, Vec<&Path>> = HashMap::new();
        for p in &paths {
            by_target.entry(p.target()).or_default().push(p);
        }
        // cells (generator, path) by degree
        let mut cells: BTreeMap<i32, Vec<(usize, &Path)>> = BTreeMap::new();
        for (g, gen) in self.generators.iter().enumerate() {
            for &p in by_target.get(&gen.vertex).into_iter().flatten() {
                let deg = gen.degree() + p.degree();
                if deg >= lo - 1 && deg <= hi + 1 {
                    cells.entry(deg).or_default().push((g, p));
                }
            }
        }
        let index: HashMap<i32, HashMap<(usize, &Path), usize>> =
            cells.iter().map(|(&d, v)| (d, v.iter().enumerate().map(|(i, &c)| (c, i)).collect())).collect();
        let mut by_col: HashMap<usize, Vec<(usize, &Series<K>)>> = HashMap::new();
        for (&(u, g), s) in self.delta.entries() {
            by_col.entry(g).or_default().push((u, s));
        }
        let empty = HashMap::new();
        let max = n.saturating_sub(1);
        let mut cx = FilteredComplex::new(n);
        for (&deg, cs) in &cells {
            let target = index.get(&(deg + 1)).unwrap_or(&empty);
            if deg > hi {
                cx.insert_piece(deg, GradedPiece { lengths: cs.iter().map(|(_, p)| p.len()).collect(), diff: vec![Vec::new(); cs.len()] });
                continue;
            }
            let diff: Vec<_> = cs
                .par_iter()
                .map(|&(g, x)| {
                    let mut acc: HashMap<usize, K> = HashMap::new();
                    let mut push = |u: usize, p: Path, c: K| {
                        let Some(&j) = target.get(&(u, &p)) else {
                            panic!("cell outside the degree window");
                        };
                        let e = acc.entry(j).or_insert_with(K::zero);
                        *e = e.add(&c);
                    };
                    for &(u, s) in by_col.get(&g).into_iter().flatten() {
                        for (p, c) in s.terms() {
                            if p.len() + x.len() <= max && p.source() == x.target() {
                                push(u, p.compose_unchecked(x), c.clone());
                            }
                        }
                    }
                    let mut dx = Series::zero(max);
                    self.algebra.d_path_into(x, &K::one(), max, &mut dx);
                    let odd = self.generators[g].shift % 2 != 0;
                    for (p, c) in dx.into_terms() {
                        push(g, p, if odd { c.neg() } else { c });
                    }
                    crate::linalg::sparse_from(acc)
                })
                .collect();
            cx.insert_piece(deg, GradedPiece { lengths: cs.iter().map(|(_, p)| p.len()).collect(), diff });
        }
        let raise = self.delta.max_len().unwrap_or(0).max(self.algebra.length_raise());
        let window = n.saturating_sub(raise);
        let degs: Vec<i32> = (lo..=hi).collect();
        let interior = degs.par_iter().map(|&p| cx.interior_homology(p, n, window)).collect();
        let truncated = degs.par_iter().map(|&p| cx.homology(p, n)).collect();
        Ok(ModuleHomology { order: n, window, degrees: degs, interior, truncated })
    }

    /// Generators and entries as coefficient/word lists.
    pub fn to_json(&self) -> serde_json::Value {
        let q = self.algebra.quiver();
        let gens: Vec<_> = self
            .generators
            .iter()
            .map(|g| serde_json::json!({"label": g.label, "vertex": q.vertex_name(g.vertex), "shift": g.shift}))
            .collect();
        let entries: Vec<_> = self
            .delta
            .entries()
            .map(|(&(u, g), s)| {
                let terms: Vec<_> =
                    s.terms().map(|(p, c)| serde_json::json!({"coeff": c.to_string(), "word": q.path_name(p)})).collect();
                serde_json::json!({"row": u, "col": g, "terms": terms})
            })
            .collect();
        serde_json::json!({"generators": gens, "differential": entries})
    }
}

/// Homology of a twisted complex at one truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleHomology {
    pub order: usize,
    /// Interior classes are those supported in lengths `< window`.
    pub window: usize,
    pub degrees: Vec<i32>,
    pub interior: Vec<usize>,
    pub truncated: Vec<usize>,
}

impl ModuleHomology {
    pub fn interior_at(&self, p: i32) -> usize {
        self.degrees.iter().position(|&d| d == p).map_or(0, |k| self.interior[k])
    }

    /// Nonzero interior dims by degree.
    pub fn support(&self) -> BTreeMap<i32, usize> {
        self.degrees.iter().zip(&self.interior).filter(|(_, &d)| d > 0).map(|(&p, &d)| (p, d)).collect()
    }

    pub fn total(&self) -> usize {
        self.interior.iter().sum()
    }
}

/// The resolution `Σ³P_i ⊕ ⊕_ρ Σ²P_{t(ρ)} ⊕ ⊕_τ ΣP_{s(τ)} ⊕ P_i` of the simple
/// `S_i`, with entries `ρ`, `-τ^`, `t_i`, `-∂_{ρτ}W`, `ρ^` and `τ`.
pub fn cofibrant_simple<K: Coeff>(g: &Arc<GinzburgAlgebra<K>>, i: VertexId) -> Result<TwistedComplex<K>, Error> {
    let base = g.qp().quiver();
    let q = g.quiver();
    let n = g.order();
    let name = |v: VertexId| base.vertex_name(v).to_string();
    let outs: Vec<_> = base.arrows_from(i).collect();
    let ins: Vec<_> = base.arrows_into(i).collect();
    let mut gens = vec![Generator::new(i, 3, format!("Σ3P{}", name(i)))];
    for &r in &outs {
        gens.push(Generator::new(base.target(r), 2, format!("Σ2P{}:{}", name(base.target(r)), base.arrow(r).name)));
    }
    for &t in &ins {
        gens.push(Generator::new(base.source(t), 1, format!("ΣP{}:{}", name(base.source(t)), base.arrow(t).name)));
    }
    gens.push(Generator::new(i, 0, format!("P{}", name(i))));
    let (b0, c0, last) = (1, 1 + outs.len(), gens.len() - 1);
    let mono = |a, c: i64| Series::monomial(q.arrow_path(a), K::from_i64(c), n);
    let mut delta = Matrix::zero(gens.len(), gens.len(), n);
    delta.add_entry(last, 0, &mono(g.loop_at(i), 1));
    for (k, &r) in outs.iter().enumerate() {
        delta.add_entry(b0 + k, 0, &mono(g.original(r), 1));
        delta.add_entry(last, b0 + k, &mono(g.dual(r), 1));
        for (l, &t) in ins.iter().enumerate() {
            let dw = cyclic_derivative(base, &base.path(&[r, t])?, g.qp().potential()).with_order(n);
            delta.add_entry(c0 + l, b0 + k, &dw.neg());
        }
    }
    for (l, &t) in ins.iter().enumerate() {
        delta.add_entry(c0 + l, 0, &mono(g.dual(t), -1));
        delta.add_entry(last, c0 + l, &mono(g.original(t), 1));
    }
    TwistedComplex::new(g.clone(), gens, delta)
}

/// `dim Hom(P, Σ^m S_j)` for every `m`: the differential of the Hom complex
/// vanishes, so this counts generators at `j` with shift `m`.
pub fn hom_dims_to_simple<K: Coeff>(p: &TwistedComplex<K>, j: VertexId) -> BTreeMap<i32, usize> {
    let mut m = BTreeMap::new();
    for g in p.generators.iter().filter(|g| g.vertex == j) {
        *m.entry(g.shift).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::field::Rational;
    use crate::qp::{jacobian_dims, JacobianQuotient, Qp};

    fn alg(q: &Qp<Rational>) -> Arc<GinzburgAlgebra<Rational>> {
        Arc::new(GinzburgAlgebra::new(q).unwrap())
    }

    #[test]
    fn c3_simple_resolution() {
        let q = corpus::c3::<Rational>(6);
        let g = alg(&q);
        let one = q.vertex("1").unwrap();
        let p = cofibrant_simple(&g, one).unwrap();
        assert_eq!(p.generators().len(), 4);
        assert!(p.is_maurer_cartan());
        // -∂_{a.c}W = -b
        let quiver = g.quiver();
        assert_eq!(p.delta().get(2, 1).unwrap().display(quiver).to_string(), "-b");
        let h = p.homology(6).unwrap();
        assert_eq!(h.support(), BTreeMap::from([(0, 1)]), "{h:?}");
        let dims = hom_dims_to_simple(&p, one);
        assert_eq!(dims.get(&0), Some(&1));
        assert_eq!(dims.get(&3), Some(&1));
        assert_eq!(hom_dims_to_simple(&p, q.vertex("2").unwrap()).get(&2), Some(&1));
    }

    #[test]
    fn resolutions_of_all_named_simples() {
        for q in [corpus::a2::<Rational>(6), corpus::k2(6), corpus::c3(6)] {
            let g = alg(&q);
            for v in q.quiver().vertices() {
                let p = cofibrant_simple(&g, v).unwrap();
                assert!(p.is_maurer_cartan());
                let h = p.homology(6).unwrap();
                assert_eq!(h.support(), BTreeMap::from([(0, 1)]), "{h:?}");
            }
        }
    }

    #[test]
    fn isolated_vertex() {
        let quiver = crate::ncseries::GradedQuiver::new(["1"]).unwrap();
        let q = Qp::<Rational>::new(quiver, Series::zero(4), 4).unwrap();
        let g = alg(&q);
        let p = cofibrant_simple(&g, q.vertex("1").unwrap()).unwrap();
        assert_eq!(p.generators().len(), 2);
        assert_eq!(p.delta().get(1, 0).unwrap().display(g.quiver()).to_string(), "t1");
        assert_eq!(p.homology(4).unwrap().support(), BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn free_module_degree_zero() {
        let q = corpus::c3::<Rational>(6);
        let g = alg(&q);
        let j = JacobianQuotient::new(&q, 5).unwrap();
        for v in q.quiver().vertices() {
            let p = TwistedComplex::projective(g.clone(), v);
            let h = p.homology_in(5, -1..=0).unwrap();
            let expect = j.basis_indices().iter().filter(|&&k| j.paths()[k].target() == v).count();
            assert_eq!(h.truncated[1], expect);
        }
        assert_eq!(jacobian_dims(&q, 5..=5).unwrap(), [6]);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let q = corpus::a2::<Rational>(5);
        let g = alg(&q);
        let v = q.vertex("2").unwrap();
        let p = TwistedComplex::projective(g.clone(), v);
        let mut id = Matrix::zero(1, 1, 5);
        id.add_entry(0, 0, &Series::lazy(v, 5));
        let c = TwistedComplex::cone(&p, &p, &id).unwrap();
        assert!(c.is_maurer_cartan());
        assert_eq!(c.homology(5).unwrap().total(), 0);
    }
}
