//! The Γ′-Γ bimodule `T` realizing a mutation, the maps `f_ρ′` and the
//! identities making `ρ′ ↦ f_ρ′` a dg algebra map `Γ′ → End(T)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{cofibrant_simple, Generator, Matrix, ModuleHomology, TwistedComplex};
use crate::field::Coeff;
use crate::ginzburg::GinzburgAlgebra;
use crate::linalg::EchelonBasis;
use crate::mutation::{premutate, MutationResult, Provenance};
use crate::ncseries::{cyclic_derivative, ArrowId, Path, Series, VertexId};
use crate::qp::{check_mutable, normalize_c3, JacobianQuotient, Qp};
use crate::Error;

/// `T = ⊕_j T_j` with `T_j = P_j` for `j ≠ i` and `T_i` the cone with
/// generators `e_Σi` (shift 1) and `e_α` for every arrow `α` out of `i`,
/// together with one endomorphism `f_x` of `T` per generator `x` of `Q̃′`.
#[derive(Clone, Debug)]
pub struct BimoduleData<K> {
    vertex: VertexId,
    gamma: Arc<GinzburgAlgebra<K>>,
    gamma2: Arc<GinzburgAlgebra<K>>,
    mutation: MutationResult<K>,
    t: TwistedComplex<K>,
    summand: Vec<VertexId>,
    maps: Vec<Matrix<K>>,
}

/// One identity `d_Λ(f_x) = f(d′x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub passed: bool,
    /// Label of the first generator of `T` where the two sides differ.
    pub first_offending: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BimoduleReport {
    pub vertex: String,
    /// Both sides were compared modulo `m^order`.
    pub order: usize,
    pub checks: Vec<IdentityCheck>,
}

impl BimoduleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl<K: Coeff> BimoduleData<K> {
    pub fn new(q: &Qp<K>, i: VertexId) -> Result<Self, Error> {
        check_mutable(q, i)?;
        let q = normalize_c3(q, i)?;
        let mutation = premutate(&q, i)?;
        let gamma = Arc::new(GinzburgAlgebra::new(&q)?);
        let gamma2 = Arc::new(GinzburgAlgebra::new(&mutation.premutated)?);
        let base = q.quiver();
        let big = gamma.quiver();
        let n = q.truncation();
        let vname = |v: VertexId| base.vertex_name(v).to_string();

        let outs: Vec<ArrowId> = base.arrows_from(i).collect();
        let mut gens = Vec::new();
        let mut summand = Vec::new();
        let mut plain: HashMap<VertexId, usize> = HashMap::new();
        let mut sigma = 0;
        let mut alpha: HashMap<ArrowId, usize> = HashMap::new();
        for v in base.vertices() {
            if v == i {
                sigma = gens.len();
                gens.push(Generator::new(i, 1, format!("eΣ{}", vname(i))));
                summand.push(i);
                for &a in &outs {
                    alpha.insert(a, gens.len());
                    gens.push(Generator::new(base.target(a), 0, format!("e[{}]", base.arrow(a).name)));
                    summand.push(i);
                }
            } else {
                plain.insert(v, gens.len());
                gens.push(Generator::new(v, 0, format!("e{}", vname(v))));
                summand.push(v);
            }
        }
        let m = gens.len();
        let word = |w: &[ArrowId], c: i64| -> Result<Series<K>, Error> {
            Ok(Series::monomial(big.path(w)?, K::from_i64(c), n))
        };
        let mut delta = Matrix::zero(m, m, n);
        for &a in &outs {
            delta.add_entry(alpha[&a], sigma, &word(&[a], 1)?);
        }
        let t = TwistedComplex::new(gamma.clone(), gens, delta)?;

        let q2 = mutation.premutated.quiver();
        let mut maps = vec![Matrix::zero(m, m, n); gamma2.quiver().arrow_count()];
        for x in q2.arrow_ids() {
            let prov = mutation.origin(&q2.arrow(x).name).expect("every arrow has a provenance").clone();
            let mut f = Matrix::zero(m, m, n);
            let mut fs = Matrix::zero(m, m, n);
            match prov {
                Provenance::Kept { from } => {
                    let g = base.arrow_id(&from)?;
                    let (s, t) = (base.source(g), base.target(g));
                    f.add_entry(plain[&t], plain[&s], &word(&[g], 1)?);
                    fs.add_entry(plain[&s], plain[&t], &word(&[gamma.dual(g)], 1)?);
                }
                Provenance::Composite { alpha: an, beta: bn } => {
                    let (a, b) = (base.arrow_id(&an)?, base.arrow_id(&bn)?);
                    f.add_entry(plain[&base.target(a)], plain[&base.source(b)], &word(&[a, b], 1)?);
                }
                Provenance::Star { of } => {
                    let a = base.arrow_id(&of)?;
                    if base.source(a) == i {
                        let ta = base.target(a);
                        f.add_entry(alpha[&a], plain[&ta], &Series::lazy(ta, n));
                        fs.add_entry(plain[&ta], sigma, &word(&[a, gamma.loop_at(i)], -1)?);
                        for &r in &outs {
                            fs.add_entry(plain[&ta], alpha[&r], &word(&[a, gamma.dual(r)], -1)?);
                        }
                    } else {
                        let sb = base.source(a);
                        f.add_entry(plain[&sb], sigma, &word(&[gamma.dual(a)], -1)?);
                        for &r in &outs {
                            let dw = cyclic_derivative(base, &base.path(&[r, a])?, q.potential()).with_order(n);
                            f.add_entry(plain[&sb], alpha[&r], &dw.neg());
                        }
                        fs.add_entry(sigma, plain[&sb], &word(&[a], 1)?);
                    }
                }
            }
            maps[x.index()] = f;
            maps[gamma2.dual(x).index()] = fs;
        }
        for v in base.vertices() {
            let mut f = Matrix::zero(m, m, n);
            if v == i {
                f.add_entry(sigma, sigma, &word(&[gamma.loop_at(i)], -1)?);
                for &r in &outs {
                    f.add_entry(sigma, alpha[&r], &word(&[gamma.dual(r)], -1)?);
                }
            } else {
                f.add_entry(plain[&v], plain[&v], &word(&[gamma.loop_at(v)], 1)?);
            }
            maps[gamma2.loop_at(v).index()] = f;
        }
        Ok(BimoduleData { vertex: i, gamma, gamma2, mutation, t, summand, maps })
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    /// `Γ` of the (c3-normalized) input.
    pub fn gamma(&self) -> &Arc<GinzburgAlgebra<K>> {
        &self.gamma
    }

    /// `Γ′` of the premutation.
    pub fn gamma_mutated(&self) -> &Arc<GinzburgAlgebra<K>> {
        &self.gamma2
    }

    pub fn mutation(&self) -> &MutationResult<K> {
        &self.mutation
    }

    pub fn module(&self) -> &TwistedComplex<K> {
        &self.t
    }

    /// The summand `T_j` each generator of `T` belongs to.
    pub fn summands(&self) -> &[VertexId] {
        &self.summand
    }

    /// `f_x` for a generator `x` of `Q̃′`.
    pub fn map(&self, x: ArrowId) -> &Matrix<K> {
        &self.maps[x.index()]
    }

    pub fn map_named(&self, name: &str) -> Result<&Matrix<K>, Error> {
        Ok(self.map(self.gamma2.quiver().arrow_id(name)?))
    }

    /// Flips the sign of `f_x`. Used to build negative controls.
    pub fn negate_map(&mut self, name: &str) -> Result<(), Error> {
        let x = self.gamma2.quiver().arrow_id(name)?;
        self.maps[x.index()] = self.maps[x.index()].neg();
        Ok(())
    }

    /// The identity of `T_j`.
    pub fn projection(&self, j: VertexId) -> Matrix<K> {
        let m = self.summand.len();
        let mut f = Matrix::zero(m, m, self.gamma.order());
        for (g, &s) in self.summand.iter().enumerate() {
            if s == j {
                f.add_entry(g, g, &Series::lazy(self.t.generators()[g].vertex, self.gamma.order()));
            }
        }
        f
    }

    /// `f_p = f_{p_1} ∘ ⋯ ∘ f_{p_l}` for a path `p = p_1⋯p_l` of `Q̃′`.
    pub fn map_path(&self, p: &Path) -> Matrix<K> {
        match p.word().split_first() {
            None => self.projection(p.source()),
            Some((first, rest)) => rest.iter().fold(self.maps[first.index()].clone(), |acc, x| acc.mul(&self.maps[x.index()])),
        }
    }

    /// The algebra map `Γ′ → End(T)` on a series.
    pub fn map_series(&self, s: &Series<K>) -> Matrix<K> {
        let m = self.summand.len();
        let mut out = Matrix::zero(m, m, self.gamma.order());
        for (p, c) in s.terms() {
            out = out.add(&self.map_path(p).scale(c));
        }
        out
    }

    /// Order up to which the identities are meaningful: one order is lost to
    /// `d(a^) = ∂_a W`.
    pub fn verification_order(&self) -> usize {
        (self.gamma.order() - 1).min(self.gamma.exact_length()).min(self.gamma2.exact_length())
    }

    /// `d_Λ(f_x) = f(d′x)` for every generator `x` of `Q̃′`, compared modulo
    /// `m^{N-1}`.
    pub fn verify(&self) -> BimoduleReport {
        let order = self.verification_order();
        let q2 = self.gamma2.quiver();
        let ids: Vec<ArrowId> = q2.arrow_ids().collect();
        let checks = ids
            .par_iter()
            .map(|&x| {
                let arrow = q2.arrow(x);
                let lhs = self.t.d_lambda(&self.maps[x.index()], arrow.degree).truncate(order - 1);
                let rhs = self.map_series(self.gamma2.differential(x)).truncate(order - 1);
                let diff = lhs.sub(&rhs);
                let first_offending =
                    diff.entries().map(|(&(_, g), _)| g).min().map(|g| self.t.generators()[g].label.clone());
                let identity = match arrow.degree {
                    0 => format!("dΛ f[{}] = 0", arrow.name),
                    -1 => format!("dΛ f[{}] = f(d {})", arrow.name, arrow.name),
                    _ => format!("dΛ f[{}] = f(Σ [ρ, ρ^]) at {}", arrow.name, q2.vertex_name(arrow.source)),
                };
                IdentityCheck { identity, passed: first_offending.is_none(), first_offending }
            })
            .collect();
        BimoduleReport { vertex: q2.vertex_name(self.vertex).to_string(), order, checks }
    }

    /// `F(M) = M ⊗_{Γ′} T` for a twisted complex `M` over `Γ′`.
    pub fn tensor(&self, m: &TwistedComplex<K>) -> Result<TwistedComplex<K>, Error> {
        let tg = self.t.generators();
        let mut gens = Vec::new();
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (g, gen) in m.generators().iter().enumerate() {
            for (h, th) in tg.iter().enumerate() {
                if self.summand[h] == gen.vertex {
                    index.insert((g, h), gens.len());
                    gens.push(Generator::new(th.vertex, gen.shift + th.shift, format!("{}⊗{}", gen.label, th.label)));
                }
            }
        }
        let mut delta = Matrix::zero(gens.len(), gens.len(), self.gamma.order());
        for (&(u, g), s) in m.delta().entries() {
            for (&(h2, h), e) in self.map_series(s).entries() {
                delta.add_entry(index[&(u, h2)], index[&(g, h)], e);
            }
        }
        for (g, gen) in m.generators().iter().enumerate() {
            for (&(h2, h), e) in self.t.delta().entries() {
                if let (Some(&a), Some(&b)) = (index.get(&(g, h2)), index.get(&(g, h))) {
                    delta.add_entry(a, b, &if gen.shift % 2 == 0 { e.clone() } else { e.neg() });
                }
            }
        }
        TwistedComplex::new(self.gamma.clone(), gens, delta)
    }

    /// `F(S′_j)` as a twisted complex over `Γ` and its homology at order `n`.
    pub fn image_of_simple(&self, j: VertexId, n: usize) -> Result<(TwistedComplex<K>, ModuleHomology), Error> {
        let p = cofibrant_simple(&self.gamma2, j)?;
        let f = self.tensor(&p)?;
        let h = f.homology(n)?;
        Ok((f, h))
    }
}

/// Bounds on `dim Φ(S′_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiInterval {
    pub vertex: String,
    pub lo: usize,
    pub hi: usize,
}

impl PhiInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// `Φ(S′_j)` sits in an exact sequence `H⁰P_j → Φ(S′_j) → ⊕_β S_i` whose
/// first map has image of codimension `lo` in `H⁰P_j` (truncated at `n`):
/// the submodule generated by `ρ` (`s(ρ) ≠ i`), `αb` and `∂_{aβ}W`. The
/// last term has dimension `#{β: j → i}`. `Φ(S′_i) = 0`.
pub fn phi_interval<K: Coeff>(q: &Qp<K>, i: VertexId, j: VertexId, n: usize) -> Result<PhiInterval, Error> {
    check_mutable(q, i)?;
    let vertex = q.quiver().vertex_name(j).to_string();
    if i == j {
        return Ok(PhiInterval { vertex, lo: 0, hi: 0 });
    }
    let q = normalize_c3(q, i)?;
    let quiver = q.quiver();
    let a = JacobianQuotient::new(&q, n)?;
    let mut gens: Vec<Series<K>> = Vec::new();
    let mono = |w: &[ArrowId]| -> Result<Series<K>, Error> { Ok(Series::monomial(quiver.path(w)?, K::one(), n)) };
    for r in quiver.arrows_into(j) {
        if quiver.source(r) != i {
            gens.push(mono(&[r])?);
        }
    }
    for al in quiver.arrows_between(i, j) {
        for b in quiver.arrows_into(i) {
            gens.push(mono(&[al, b])?);
        }
    }
    let betas: Vec<ArrowId> = quiver.arrows_between(j, i).collect();
    for &be in &betas {
        for al in quiver.arrows_from(i) {
            gens.push(cyclic_derivative(quiver, &quiver.path(&[al, be])?, q.potential()).with_order(n));
        }
    }
    let mut sub = EchelonBasis::new();
    for g in &gens {
        for p in a.paths() {
            let v = a.normal_form(a.vector(&g.right_mul_path(p)));
            if !v.is_empty() {
                sub.insert(v);
            }
        }
    }
    let dim = a.basis_indices().iter().filter(|&&k| a.paths()[k].target() == j).count();
    let lo = dim - sub.rank();
    Ok(PhiInterval { vertex, lo, hi: lo + betas.len() })
}
