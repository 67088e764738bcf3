//! The completed Ginzburg dg algebra of a QP, truncated.
//!
//! `Q̃` keeps the arrows of `Q` in degree 0 with their ids, adds a dual `a^`
//! (degree -1, reversed) for every arrow `a`, and a loop `t<v>` of degree -2
//! at every vertex `v`. The differential is `d(a) = 0`, `d(a^) = ∂_a W`,
//! `d(t_v) = Σ_{t(a)=v} a·a^ - Σ_{s(a)=v} a^·a`, extended by the graded
//! Leibniz rule.

use std::collections::HashMap;

use serde::Serialize;

use crate::field::Coeff;
use crate::homology::{FilteredComplex, GradedPiece, HomologyTable};
use crate::ncseries::{cyclic_derivative, cyclically_equivalent, ArrowId, GradedQuiver, Path, Series, Substitution, VertexId, Word};
use crate::qp::{Accuracy, JacobianQuotient, Qp};
use crate::Error;

#[derive(Clone, Debug)]
pub struct GinzburgAlgebra<K> {
    qp: Qp<K>,
    quiver: GradedQuiver,
    diff: Vec<Series<K>>,
}

impl<K: Coeff> GinzburgAlgebra<K> {
    pub fn new(q: &Qp<K>) -> Result<Self, Error> {
        let base = q.quiver();
        let n = q.truncation();
        let mut quiver = GradedQuiver::new(base.vertex_names().iter().cloned())?;
        for a in base.arrows() {
            quiver.add_arrow(a.name.clone(), a.source, a.target, 0)?;
        }
        for a in base.arrows() {
            let name = quiver.fresh_arrow_name(&format!("{}^", a.name));
            quiver.add_arrow(name, a.target, a.source, -1)?;
        }
        for v in base.vertices() {
            let name = quiver.fresh_arrow_name(&format!("t{}", base.vertex_name(v)));
            quiver.add_arrow(name, v, v, -2)?;
        }
        let m = base.arrow_count();
        let mut diff = vec![Series::zero(n); m];
        for a in base.arrow_ids() {
            diff.push(cyclic_derivative(base, &base.arrow_path(a), q.potential()).with_order(n));
        }
        for v in base.vertices() {
            let mut s = Series::zero(n);
            for a in base.arrow_ids() {
                let dual = ArrowId((m + a.index()) as u32);
                if base.target(a) == v {
                    s.add_term(quiver.path(&[a, dual])?, K::one());
                }
                if base.source(a) == v {
                    s.add_term(quiver.path(&[dual, a])?, K::one().neg());
                }
            }
            diff.push(s);
        }
        Ok(GinzburgAlgebra { qp: q.clone(), quiver, diff })
    }

    pub fn qp(&self) -> &Qp<K> {
        &self.qp
    }

    /// The graded quiver `Q̃`.
    pub fn quiver(&self) -> &GradedQuiver {
        &self.quiver
    }

    pub fn order(&self) -> usize {
        self.qp.truncation()
    }

    /// Longest path length up to which the differential is known exactly.
    pub fn exact_length(&self) -> usize {
        match self.qp.accuracy() {
            Accuracy::Exact => self.order(),
            Accuracy::UpTo(w) => w.min(self.order()).saturating_sub(1),
        }
    }

    fn base_arrows(&self) -> usize {
        self.qp.quiver().arrow_count()
    }

    /// The arrow of `Q̃` corresponding to an arrow of `Q`.
    pub fn original(&self, a: ArrowId) -> ArrowId {
        a
    }

    pub fn dual(&self, a: ArrowId) -> ArrowId {
        ArrowId((self.base_arrows() + a.index()) as u32)
    }

    pub fn loop_at(&self, v: VertexId) -> ArrowId {
        ArrowId((2 * self.base_arrows() + v.index()) as u32)
    }

    /// The differential of a generator.
    pub fn differential(&self, a: ArrowId) -> &Series<K> {
        &self.diff[a.index()]
    }

    /// Replaces the differential of one generator. Used to build negative
    /// controls for the consistency checks.
    pub fn perturb_differential(&mut self, a: ArrowId, image: Series<K>) {
        self.diff[a.index()] = image.with_order(self.order());
    }

    /// Adds `c · d(p)` to `out`, keeping paths of length at most `max_len`.
    pub fn d_path_into(&self, p: &Path, c: &K, max_len: usize, out: &mut Series<K>) {
        let w = p.word();
        let mut deg = 0;
        for k in 0..w.len() {
            let img = &self.diff[w[k].index()];
            let rest = w.len() - 1;
            for (q, b) in img.terms() {
                if rest + q.len() > max_len {
                    continue;
                }
                let mut word = Word::with_capacity(rest + q.len());
                word.extend_from_slice(&w[..k]);
                word.extend_from_slice(q.word());
                word.extend_from_slice(&w[k + 1..]);
                let coeff = if deg % 2 == 0 { c.mul(b) } else { c.mul(b).neg() };
                out.add_term(Path::from_parts(p.source(), p.target(), p.degree() + 1, word), coeff);
            }
            deg += self.quiver.degree(w[k]);
        }
    }

    /// `d` applied to a series, at the order of the series.
    pub fn apply_d(&self, s: &Series<K>) -> Series<K> {
        let mut out = Series::zero(s.order());
        for (p, c) in s.terms() {
            self.d_path_into(p, c, s.order(), &mut out);
        }
        out
    }

    /// Generators whose differential does not square to zero.
    pub fn d_squared_failures(&self) -> Vec<String> {
        self.quiver
            .arrow_ids()
            .filter(|&a| !self.apply_d(&self.diff[a.index()]).is_zero())
            .map(|a| self.quiver.arrow(a).name.clone())
            .collect()
    }

    /// `d(d(ρ)) = 0` for every generator `ρ` of `Q̃`.
    pub fn check_d_squared(&self) -> bool {
        self.d_squared_failures().is_empty()
    }

    /// All paths of `Q̃` of length `< n` and degree at least `min_degree`,
    /// lazy paths included.
    pub fn paths_above(&self, n: usize, min_degree: i32) -> Vec<Path> {
        let mut out = Vec::new();
        let mut frontier: Vec<Path> = self.quiver.vertices().map(Path::lazy).collect();
        for _ in 0..n {
            let mut next = Vec::new();
            for p in frontier {
                if p.len() + 1 < n {
                    for a in self.quiver.arrows_from(p.target()) {
                        if p.degree() + self.quiver.degree(a) >= min_degree {
                            next.push(self.quiver.arrow_path(a).compose_unchecked(&p));
                        }
                    }
                }
                out.push(p);
            }
            frontier = next;
        }
        out
    }

    /// How much the differential can raise path length: `d` replaces one
    /// generator by a path of length up to this plus one.
    pub fn length_raise(&self) -> usize {
        self.diff.iter().filter_map(Series::max_len).max().unwrap_or(1).saturating_sub(1).max(1)
    }

    /// `Γ/mⁿ` in degrees `>= min_degree` as a filtered complex.
    pub fn truncated_complex(&self, n: usize, min_degree: i32) -> Result<FilteredComplex<K>, Error> {
        self.check_order(n)?;
        let mut cells: HashMap<i32, Vec<Path>> = HashMap::new();
        for p in self.paths_above(n, min_degree) {
            cells.entry(p.degree()).or_default().push(p);
        }
        let index: HashMap<i32, HashMap<&Path, usize>> =
            cells.iter().map(|(&p, v)| (p, v.iter().enumerate().map(|(i, c)| (c, i)).collect())).collect();
        let empty = HashMap::new();
        let mut cx = FilteredComplex::new(n);
        for (&deg, paths) in &cells {
            let target = index.get(&(deg + 1)).unwrap_or(&empty);
            let diff = paths
                .iter()
                .map(|p| {
                    let mut img = Series::zero(n.saturating_sub(1));
                    self.d_path_into(p, &K::one(), n.saturating_sub(1), &mut img);
                    img.into_terms().into_iter().map(|(q, c)| (target[&q], c)).collect::<Vec<_>>()
                })
                .map(crate::linalg::sparse_from)
                .collect();
            cx.insert_piece(deg, GradedPiece { lengths: paths.iter().map(Path::len).collect(), diff });
        }
        Ok(cx)
    }

    fn check_order(&self, n: usize) -> Result<(), Error> {
        if n > self.exact_length() + 1 {
            return Err(Error::InsufficientTruncation { requested: n, needed: n - 1, available: self.exact_length() });
        }
        Ok(())
    }
}

/// `dim H^p(Γ/mⁿ)` for the given degrees and orders.
pub fn truncation_homology<K: Coeff>(g: &GinzburgAlgebra<K>, orders: &[usize], degrees: &[i32]) -> Result<HomologyTable, Error> {
    let (Some(&n), Some(&lo)) = (orders.iter().max(), degrees.iter().min()) else {
        return Ok(HomologyTable::from_map(degrees.to_vec(), orders.to_vec(), &Default::default()));
    };
    let cx = g.truncated_complex(n, lo - 1)?;
    let map = cx.table(degrees, orders, None);
    Ok(HomologyTable::from_map(degrees.to_vec(), orders.to_vec(), &map))
}

/// The induced map `φ_*` between Ginzburg algebras and its check against
/// the differentials.
#[derive(Clone, Debug)]
pub struct Transport<K> {
    pub map: Substitution<K>,
    /// Generators where `φ_* ∘ d` and `d′ ∘ φ_*` differ.
    pub failures: Vec<String>,
    /// Identities were compared on paths of length `< checked_order`.
    pub checked_order: usize,
}

impl<K> Transport<K> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Extends a right-equivalence `φ: (Q, W) -> (Q′, W′)` to `Γ -> Γ′` by
/// `φ_*(ρ) = φ(ρ)`, `φ_*(t_i) = t′_i` and
/// `φ_*(ρ^) = Σ_ρ′ Σ_p Σ_{j: p_j = ρ} b_{p,ρ′} φ(p_{j+1}⋯p_l) ρ′^ φ(p_1⋯p_{j-1})`
/// where `φ⁻¹(ρ′) = Σ_p b_{p,ρ′} p`.
pub fn transport_ginzburg<K: Coeff>(
    phi: &Substitution<K>,
    g: &GinzburgAlgebra<K>,
    g2: &GinzburgAlgebra<K>,
) -> Result<Transport<K>, Error> {
    let (q1, q2) = (g.qp.quiver(), g2.qp.quiver());
    if phi.source() != q1 || phi.target() != q2 {
        return Err(Error::NotARightEquivalence("quivers do not match the substitution".into()));
    }
    let n = phi.order();
    if n != g.order() || n != g2.order() {
        return Err(Error::NotARightEquivalence(format!("orders differ: {n}, {}, {}", g.order(), g2.order())));
    }
    let w = g.exact_length().min(g2.exact_length()) + 1;
    let pushed = phi.substitute(g.qp.potential())?.truncate(w.min(n));
    if !cyclically_equivalent(q2, &pushed, &g2.qp.potential().truncate(w.min(n)))? {
        return Err(Error::NotARightEquivalence("φ(W) is not cyclically equivalent to W′".into()));
    }
    let psi = phi.invert()?;

    let mut images: Vec<Series<K>> = Vec::with_capacity(g.quiver.arrow_count());
    for a in q1.arrow_ids() {
        images.push(phi.image(a).clone());
    }
    for rho in q1.arrow_ids() {
        let mut img = Series::zero(n);
        for rho2 in q2.arrow_ids() {
            let star = Series::monomial(g2.quiver.arrow_path(g2.dual(rho2)), K::one(), n);
            for (p, b) in psi.image(rho2).terms() {
                for (j, &x) in p.word().iter().enumerate() {
                    if x != rho {
                        continue;
                    }
                    let left = phi.apply_path(&p.factor(q1, j + 1, p.len()));
                    let right = phi.apply_path(&p.factor(q1, 0, j));
                    let term = left.mul(&star)?.mul(&right)?;
                    img.add_scaled(&term, b)?;
                }
            }
        }
        images.push(img);
    }
    for v in q1.vertices() {
        let v2 = q2.vertex_id(q1.vertex_name(v))?;
        images.push(Series::monomial(g2.quiver.arrow_path(g2.loop_at(v2)), K::one(), n));
    }
    let map = Substitution::new(g.quiver.clone(), g2.quiver.clone(), images, n)?;

    let checked = g.exact_length().min(g2.exact_length()).min(n - 1);
    let mut failures = Vec::new();
    for a in g.quiver.arrow_ids() {
        let lhs = map.substitute(g.differential(a))?.truncate(checked);
        let rhs = g2.apply_d(map.image(a)).truncate(checked);
        if lhs != rhs {
            failures.push(g.quiver.arrow(a).name.clone());
        }
    }
    Ok(Transport { map, failures, checked_order: checked + 1 })
}

/// Homology of the complex `0 → P_i → ⊕_ρ P_{t(ρ)} → ⊕_τ P_{s(τ)} → P_i → 0`
/// of projective modules over the truncated Jacobian algebra, in degrees
/// -3..=0.
///
/// A map entry of length `h` sends the top `h` lengths to zero, so only the
/// image of the homology in lengths `< n - h` is free of truncation
/// artifacts, with `h` the longest entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Degree0Report {
    pub vertex: String,
    pub order: usize,
    /// Classes are reported when supported in lengths `< window`.
    pub window: usize,
    /// `(degree, dim)` of the interior homology.
    pub interior: Vec<(i32, usize)>,
    /// `(degree, dim)` of the truncated complex itself.
    pub truncated: Vec<(i32, usize)>,
    /// The interior homology is `S_i` in degree 0.
    pub consistent: bool,
    /// The first map `x ↦ (ρx)_ρ` has no interior kernel.
    pub first_map_injective: bool,
}

type MapEntries<K> = Vec<((usize, usize), Series<K>)>;

pub fn degree0_criterion<K: Coeff>(q: &Qp<K>, i: VertexId, n: usize) -> Result<Degree0Report, Error> {
    let quiver = q.quiver();
    if quiver.has_loop_at(i) {
        return Err(crate::qp::QpError::LoopAtVertex(quiver.vertex_name(i).to_string()).into());
    }
    let a = JacobianQuotient::new(q, n)?;
    let outs: Vec<ArrowId> = quiver.arrows_from(i).collect();
    let ins: Vec<ArrowId> = quiver.arrows_into(i).collect();
    let summands: [Vec<VertexId>; 4] = [
        vec![i],
        outs.iter().map(|&r| quiver.target(r)).collect(),
        ins.iter().map(|&t| quiver.source(t)).collect(),
        vec![i],
    ];
    let arrow = |x: ArrowId| Series::monomial(quiver.arrow_path(x), K::one(), n);
    // maps[d][(to, from)] for the differential out of degree d - 3
    let mut maps: [MapEntries<K>; 3] = Default::default();
    for (r, &rho) in outs.iter().enumerate() {
        maps[0].push(((r, 0), arrow(rho)));
        for (t, &tau) in ins.iter().enumerate() {
            let dw = cyclic_derivative(quiver, &quiver.path(&[rho, tau])?, q.potential()).with_order(n).neg();
            maps[1].push(((t, r), dw));
        }
    }
    for (t, &tau) in ins.iter().enumerate() {
        maps[2].push(((0, t), arrow(tau)));
    }

    let basis = a.basis_indices();
    let a = &a;
    // cells of degree d - 3: (summand, path index) pairs
    let cells: Vec<Vec<(usize, usize)>> = summands
        .iter()
        .map(|vs| {
            vs.iter()
                .enumerate()
                .flat_map(|(s, &v)| basis.iter().filter(move |&&k| a.paths()[k].target() == v).map(move |&k| (s, k)))
                .collect()
        })
        .collect();
    let lookup: Vec<HashMap<(usize, usize), usize>> =
        cells.iter().map(|c| c.iter().enumerate().map(|(i, &x)| (x, i)).collect()).collect();

    let mut cx = FilteredComplex::new(n);
    for d in 0..4 {
        let lengths = cells[d].iter().map(|&(_, k)| a.paths()[k].len()).collect();
        let diff = cells[d]
            .iter()
            .map(|&(s, k)| {
                let Some(m) = maps.get(d) else { return Vec::new() };
                let x = &a.paths()[k];
                let mut out: Vec<(usize, K)> = Vec::new();
                for ((to, from), f) in m {
                    if *from != s {
                        continue;
                    }
                    let prod = f.right_mul_path(x);
                    let nf = a.normal_form(a.vector(&prod));
                    out.extend(nf.into_iter().map(|(j, c)| (lookup[d + 1][&(*to, j)], c)));
                }
                crate::linalg::sparse_from(out)
            })
            .collect();
        cx.insert_piece(d as i32 - 3, GradedPiece { lengths, diff });
    }
    let degrees = [-3, -2, -1, 0];
    let raise = maps.iter().flatten().filter_map(|(_, f)| f.max_len()).max().unwrap_or(1).max(1);
    let window = n.saturating_sub(raise);
    let interior: Vec<(i32, usize)> = degrees.iter().map(|&p| (p, cx.interior_homology(p, n, window))).collect();
    let truncated = degrees.iter().map(|&p| (p, cx.homology(p, n))).collect();
    Ok(Degree0Report {
        vertex: quiver.vertex_name(i).to_string(),
        order: n,
        window,
        consistent: interior.iter().all(|&(p, d)| d == usize::from(p == 0)),
        first_map_injective: interior[0].1 == 0,
        interior,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::field::Rational;
    use crate::qp::{apply_equiv, jacobian_dims, split};

    fn show(g: &GinzburgAlgebra<Rational>, a: &str) -> String {
        let q = g.quiver();
        g.differential(q.arrow_id(a).unwrap()).display(q).to_string()
    }

    fn point(n: usize) -> Qp<Rational> {
        Qp::new(GradedQuiver::new(["1"]).unwrap(), Series::zero(n), n).unwrap()
    }

    #[test]
    fn a2_differential() {
        let g = GinzburgAlgebra::new(&corpus::a2::<Rational>(6)).unwrap();
        let names: Vec<_> = g.quiver().arrows().iter().map(|a| (a.name.as_str(), a.degree)).collect();
        assert_eq!(names, [("b", 0), ("a", 0), ("b^", -1), ("a^", -1), ("t1", -2), ("t2", -2), ("t3", -2)]);
        assert_eq!(show(&g, "a^"), "0");
        assert_eq!(show(&g, "t1"), "-b^.b");
        assert_eq!(show(&g, "t2"), "b.b^ - a^.a");
        assert_eq!(show(&g, "t3"), "a.a^");
        assert!(g.check_d_squared());
    }

    #[test]
    fn c3_differential() {
        let mut g = GinzburgAlgebra::new(&corpus::c3::<Rational>(6)).unwrap();
        assert_eq!(show(&g, "a^"), "c.b");
        assert_eq!(show(&g, "b^"), "a.c");
        assert_eq!(show(&g, "c^"), "b.a");
        assert!(g.check_d_squared());
        let bad = g.quiver().path_from_names("a.c").unwrap();
        let a = g.quiver().arrow_id("b^").unwrap();
        g.perturb_differential(a, Series::monomial(bad, Rational::from_i64(2), 6));
        assert_eq!(g.d_squared_failures(), ["t2", "t3"]);
    }

    #[test]
    fn point_homology() {
        let g = GinzburgAlgebra::new(&point(3)).unwrap();
        let t = truncation_homology(&g, &[3], &[-2, -1, 0]).unwrap();
        assert_eq!(t.get(0, 3), Some(1));
        assert_eq!(t.get(-1, 3), Some(0));
        assert_eq!(t.get(-2, 3), Some(1));
    }

    #[test]
    fn degree_zero_row_is_jacobian() {
        for q in [corpus::a2::<Rational>(6), corpus::c3(6), corpus::k2(6)] {
            let g = GinzburgAlgebra::new(&q).unwrap();
            let orders: Vec<usize> = (1..=6).collect();
            let t = truncation_homology(&g, &orders, &[-1, 0]).unwrap();
            assert_eq!(t.row(0).unwrap(), jacobian_dims(&q, 1..=6).unwrap());
        }
    }

    #[test]
    fn corpus_degree_zero_rows() {
        for (label, q) in corpus::corpus::<Rational>(6) {
            let g = GinzburgAlgebra::new(&q).unwrap();
            assert!(g.check_d_squared(), "{label}");
            let t = truncation_homology(&g, &[1, 2, 3, 4, 5, 6], &[-4, -3, -2, -1, 0]).unwrap();
            assert_eq!(t.row(0).unwrap(), jacobian_dims(&q, 1..=6).unwrap(), "{label}");
        }
    }

    #[test]
    fn order_beyond_accuracy_refused() {
        let q = corpus::c3::<Rational>(6).with_accuracy(Accuracy::UpTo(4));
        let g = GinzburgAlgebra::new(&q).unwrap();
        assert!(truncation_homology(&g, &[4], &[0]).is_ok());
        assert!(matches!(truncation_homology(&g, &[5], &[0]), Err(Error::InsufficientTruncation { .. })));
    }

    #[test]
    fn transport_identity_and_rescaling() {
        let q = corpus::c3::<Rational>(6);
        let g = GinzburgAlgebra::new(&q).unwrap();
        let id = Substitution::identity(q.quiver(), 6);
        let t = transport_ginzburg(&id, &g, &g).unwrap();
        assert!(t.passed());
        assert!(t.map.is_identity());

        let a = q.quiver().arrow_id("a").unwrap();
        let lambda = Rational::from_i64(3);
        let phi = Substitution::from_overrides(
            q.quiver(),
            6,
            [(a, Series::monomial(q.quiver().arrow_path(a), lambda.clone(), 6))],
        )
        .unwrap();
        let q2 = apply_equiv(&phi, &q).unwrap();
        let g2 = GinzburgAlgebra::new(&q2).unwrap();
        let t = transport_ginzburg(&phi, &g, &g2).unwrap();
        assert!(t.passed(), "{:?}", t.failures);
        let star = g.dual(a);
        let expect = Series::monomial(g2.quiver().arrow_path(g2.dual(a)), lambda.inv().unwrap(), 6);
        assert_eq!(t.map.image(star), &expect);
    }

    #[test]
    fn transport_split_witness() {
        let mut quiver = GradedQuiver::new(["1", "2"]).unwrap();
        quiver.add_arrow_named("a", "1", "2", 0).unwrap();
        quiver.add_arrow_named("b", "2", "1", 0).unwrap();
        let w = Series::from_terms(
            8,
            [
                (quiver.path_from_names("a.b").unwrap(), Rational::one()),
                (quiver.path_from_names("a.b.a.b").unwrap(), Rational::one()),
            ],
        );
        let q = Qp::new(quiver, w, 8).unwrap();
        let s = split(&q).unwrap();
        let q2 = apply_equiv(&s.witness, &q).unwrap();
        let t = transport_ginzburg(&s.witness, &GinzburgAlgebra::new(&q).unwrap(), &GinzburgAlgebra::new(&q2).unwrap()).unwrap();
        assert!(t.passed(), "{:?}", t.failures);
    }

    #[test]
    fn transport_rejects_non_equivalence() {
        let q = corpus::c3::<Rational>(6);
        let g = GinzburgAlgebra::new(&q).unwrap();
        let a = q.quiver().arrow_id("a").unwrap();
        let phi = Substitution::from_overrides(
            q.quiver(),
            6,
            [(a, Series::monomial(q.quiver().arrow_path(a), Rational::from_i64(2), 6))],
        )
        .unwrap();
        assert!(matches!(transport_ginzburg(&phi, &g, &g), Err(Error::NotARightEquivalence(_))));
    }

    #[test]
    fn degree0_examples() {
        let k2 = corpus::k2::<Rational>(6);
        let r = degree0_criterion(&k2, k2.vertex("1").unwrap(), 6).unwrap();
        assert!(r.consistent, "{r:?}");

        let c3 = corpus::c3::<Rational>(6);
        let r = degree0_criterion(&c3, c3.vertex("1").unwrap(), 6).unwrap();
        assert!(!r.consistent, "{r:?}");

        let mut quiver = GradedQuiver::new(["1", "2"]).unwrap();
        quiver.add_arrow_named("b", "1", "2", 0).unwrap();
        let q = Qp::<Rational>::new(quiver, Series::zero(4), 4).unwrap();
        let r = degree0_criterion(&q, q.vertex("1").unwrap(), 4).unwrap();
        assert!(r.first_map_injective);
    }
}
