//! Premutation, mutation and the involution check.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::field::Coeff;
use crate::ncseries::{ArrowId, GradedQuiver, Series, VertexId, Word};
use crate::qp::{check_mutable, jacobian_dims, normalize_c3, split, Accuracy, QpError, Qp, SplitResult};

/// Where an arrow of a premutated quiver comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Kept { from: String },
    Composite { alpha: String, beta: String },
    Star { of: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArrowOrigin {
    pub name: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct MutationResult<K> {
    pub vertex: VertexId,
    /// The premutation `μ̃_i(Q, W)`.
    pub premutated: Qp<K>,
    /// Provenance of every arrow of `premutated`.
    pub names: Vec<ArrowOrigin>,
    /// Reduction of `premutated`, present when a mutation was requested.
    pub split: Option<SplitResult<K>>,
}

impl<K: Coeff> MutationResult<K> {
    /// The reduced part when available, the premutation otherwise.
    pub fn result(&self) -> &Qp<K> {
        self.split.as_ref().map_or(&self.premutated, |s| &s.reduced)
    }

    pub fn origin(&self, name: &str) -> Option<&Provenance> {
        self.names.iter().find(|o| o.name == name).map(|o| &o.provenance)
    }
}

/// Accuracy after premutating a potential known up to order `w`.
///
/// Each passage through `i` uses at least three arrows of a cycle and loses
/// one, so a term of length `L` in the result comes from terms of length at
/// most `3L/2`.
pub fn premutation_accuracy(a: Accuracy) -> Accuracy {
    match a {
        Accuracy::Exact => Accuracy::Exact,
        Accuracy::UpTo(w) => Accuracy::UpTo((2 * (w + 1)).div_ceil(3) - 1),
    }
}

fn star_name(name: &str) -> String {
    format!("{name}*")
}

/// The premutation `μ̃_i`: composites `[α.β]` for every `β` into `i` and `α`
/// out of `i`, reversal of the arrows at `i`, and `W′ = W′₁ + Σ [αβ] β* α*`.
pub fn premutate<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<MutationResult<K>, QpError> {
    check_mutable(q, i)?;
    let q = normalize_c3(q, i)?;
    let old = q.quiver();
    let outs: Vec<ArrowId> = old.arrows_from(i).collect();
    let ins: Vec<ArrowId> = old.arrows_into(i).collect();

    let mut new = GradedQuiver::new(old.vertex_names().iter().cloned())?;
    let mut names = Vec::new();
    let mut kept: BTreeMap<ArrowId, ArrowId> = BTreeMap::new();
    for a in old.arrow_ids() {
        let arr = old.arrow(a);
        if arr.source != i && arr.target != i {
            let id = new.add_arrow(arr.name.clone(), arr.source, arr.target, 0)?;
            kept.insert(a, id);
            names.push(ArrowOrigin { name: arr.name.clone(), provenance: Provenance::Kept { from: arr.name.clone() } });
        }
    }
    let mut composite: BTreeMap<(ArrowId, ArrowId), ArrowId> = BTreeMap::new();
    for &alpha in &outs {
        for &beta in &ins {
            let (an, bn) = (&old.arrow(alpha).name, &old.arrow(beta).name);
            let name = new.fresh_arrow_name(&format!("[{an}.{bn}]"));
            let id = new.add_arrow(name.clone(), old.source(beta), old.target(alpha), 0)?;
            composite.insert((alpha, beta), id);
            names.push(ArrowOrigin { name, provenance: Provenance::Composite { alpha: an.clone(), beta: bn.clone() } });
        }
    }
    let mut star: BTreeMap<ArrowId, ArrowId> = BTreeMap::new();
    let star_names: Vec<(ArrowId, String)> = old
        .arrow_ids()
        .filter(|&a| old.source(a) == i || old.target(a) == i)
        .map(|a| (a, star_name(&old.arrow(a).name)))
        .collect();
    for (a, raw) in &star_names {
        let base = raw.strip_suffix("**").filter(|b| {
            new.arrow_id(b).is_err() && !star_names.iter().any(|(_, other)| other == b)
        });
        let name = new.fresh_arrow_name(base.unwrap_or(raw));
        let id = new.add_arrow(name.clone(), old.target(*a), old.source(*a), 0)?;
        star.insert(*a, id);
        names.push(ArrowOrigin { name, provenance: Provenance::Star { of: old.arrow(*a).name.clone() } });
    }

    let n = q.truncation();
    let mut w = Series::zero(n);
    for (p, c) in q.potential().terms() {
        let word = p.word();
        let mut out = Word::new();
        let mut k = 0;
        while k < word.len() {
            if old.source(word[k]) == i {
                out.push(composite[&(word[k], word[k + 1])]);
                k += 2;
            } else {
                out.push(kept[&word[k]]);
                k += 1;
            }
        }
        w.add_term(new.path(&out)?, c.clone());
    }
    for &alpha in &outs {
        for &beta in &ins {
            let p = new.path(&[composite[&(alpha, beta)], star[&beta], star[&alpha]])?;
            w.add_term(p, K::one());
        }
    }
    let premutated = Qp::with_representatives(new, w, n)?.with_accuracy(premutation_accuracy(q.accuracy()));
    debug_assert!(check_mutable(&premutated, i).is_ok());
    debug_assert!(premutated.potential().terms().all(|(p, _)| p.source() != i));
    Ok(MutationResult { vertex: i, premutated, names, split: None })
}

/// The mutation `μ_i`: the reduced part of the premutation.
pub fn mutate<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<MutationResult<K>, QpError> {
    let mut r = premutate(q, i)?;
    r.split = Some(split(&r.premutated)?);
    Ok(r)
}

/// Smallest accepted watermark of a mutation result. Below it the cubic
/// terms, which decide the next mutation, are unknown.
pub const MIN_WATERMARK: usize = 3;

/// [`mutate`], refusing results whose watermark drops below [`MIN_WATERMARK`].
pub fn mutate_checked<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<MutationResult<K>, QpError> {
    let r = mutate(q, i)?;
    let w = r.result().watermark();
    if w < MIN_WATERMARK {
        return Err(QpError::WatermarkExhausted(w));
    }
    Ok(r)
}

/// What a mutation changed in the arrow set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MutationDelta {
    pub added: Vec<String>,
    pub removed: Vec<String>,
    /// `(old, new)` for reversed arrows.
    pub renamed: Vec<(String, String)>,
    /// Trivial pairs split off by the reduction.
    pub cancelled: Vec<(String, String)>,
}

impl<K: Coeff> MutationResult<K> {
    /// Compares the arrows of `before` with those of the result.
    pub fn delta(&self, before: &Qp<K>) -> MutationDelta {
        let old: Vec<&str> = before.quiver().arrows().iter().map(|a| a.name.as_str()).collect();
        let new: Vec<&str> = self.result().quiver().arrows().iter().map(|a| a.name.as_str()).collect();
        let mut d = MutationDelta::default();
        for o in &self.names {
            if let Provenance::Star { of } = &o.provenance {
                if new.contains(&o.name.as_str()) {
                    d.renamed.push((of.clone(), o.name.clone()));
                }
            }
        }
        d.added = new
            .iter()
            .filter(|n| !old.contains(n) && !d.renamed.iter().any(|(_, r)| r == *n))
            .map(|n| n.to_string())
            .collect();
        d.removed = old
            .iter()
            .filter(|n| !new.contains(n) && !d.renamed.iter().any(|(o, _)| o == *n))
            .map(|n| n.to_string())
            .collect();
        if let Some(s) = &self.split {
            d.cancelled = s.trivial_pair_names(self.premutated.quiver());
        }
        d
    }
}

/// Arrow counts keyed by `(source, target)` names.
pub type ArrowCounts = BTreeMap<(String, String), usize>;

pub fn arrow_counts(q: &GradedQuiver) -> ArrowCounts {
    let mut m = BTreeMap::new();
    for a in q.arrows() {
        *m.entry((q.vertex_name(a.source).to_string(), q.vertex_name(a.target).to_string())).or_insert(0) += 1;
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct InvolutionReport {
    pub vertex: String,
    pub arrows_match: bool,
    pub original_arrows: Vec<((String, String), usize)>,
    pub twice_mutated_arrows: Vec<((String, String), usize)>,
    /// Jacobian dimensions were compared for orders `1..=orders_compared`.
    pub orders_compared: usize,
    pub original_dims: Vec<usize>,
    pub twice_mutated_dims: Vec<usize>,
    pub dims_match: bool,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.arrows_match && self.dims_match
    }
}

/// Compares the reduced part of `μ̃_i(μ̃_i(Q, W))` with the reduced part of
/// `(Q, W)`: arrow counts per vertex pair and Jacobian dimensions up to order
/// `N - 2` (or the accuracy watermark, whichever is lower).
pub fn involution_report<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<InvolutionReport, QpError> {
    let once = premutate(q, i)?;
    let twice = premutate(&once.premutated, i)?;
    let back = split(&twice.premutated)?.reduced;
    let orig = split(q)?.reduced;
    let a0 = arrow_counts(orig.quiver());
    let a2 = arrow_counts(back.quiver());
    let orders = q.truncation().saturating_sub(2).min(back.watermark()).min(orig.watermark());
    let d0 = jacobian_dims(&orig, 1..=orders)?;
    let d2 = jacobian_dims(&back, 1..=orders)?;
    Ok(InvolutionReport {
        vertex: q.quiver().vertex_name(i).to_string(),
        arrows_match: a0 == a2,
        original_arrows: a0.into_iter().collect(),
        twice_mutated_arrows: a2.into_iter().collect(),
        orders_compared: orders,
        dims_match: d0 == d2,
        original_dims: d0,
        twice_mutated_dims: d2,
    })
}
