//! Quivers with potential.

mod jacobian;
mod split;

use std::fmt;

use serde::Serialize;

use crate::field::Coeff;
use crate::ncseries::{cyclic_normalize, normalize_cycles, GradedQuiver, Path, Series, SeriesError, Substitution, VertexId};

pub use jacobian::{jacobian_dims, jacobian_ideal_is_closed, JacobianQuotient};
pub use split::{split, SplitResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QpError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("truncation order must be at least 2, got {0}")]
    TruncationTooSmall(usize),
    #[error("arrow `{0}` has nonzero degree")]
    GradedArrow(String),
    #[error("potential term `{0}` is not a cycle")]
    NotACycle(String),
    #[error("potential is not in m^2: term `{0}` has length 1")]
    NotInM2(String),
    #[error("loop at vertex {0}")]
    LoopAtVertex(String),
    #[error("two-cycle at vertex {0}")]
    TwoCycleAtVertex(String),
    #[error("vertex sets differ")]
    VertexSetMismatch,
    #[error("arrow name `{0}` used by both summands")]
    ArrowNameClash(String),
    #[error("quadratic term on a loop at vertex {0} cannot be split")]
    QuadraticLoop(String),
    #[error("reduction did not reach a fixpoint within {0} passes")]
    SplitDidNotConverge(usize),
    #[error("order {requested} exceeds the accuracy of the potential ({available})")]
    InsufficientTruncation { requested: usize, available: usize },
    #[error("accuracy watermark exhausted: the result would be known only up to order {0}")]
    WatermarkExhausted(usize),
    #[error("quiver must be non-empty")]
    EmptyQuiver,
}

/// How far a truncated potential is known to agree with the true one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum Accuracy {
    /// The stored series is the whole potential.
    Exact,
    /// Terms of length at most the given order are correct.
    UpTo(usize),
}

impl Accuracy {
    /// Highest path length known to be correct at truncation `n`.
    pub fn order(self, n: usize) -> usize {
        match self {
            Accuracy::Exact => n,
            Accuracy::UpTo(w) => w.min(n),
        }
    }

    pub fn min(self, other: Accuracy) -> Accuracy {
        match (self, other) {
            (Accuracy::Exact, x) | (x, Accuracy::Exact) => x,
            (Accuracy::UpTo(a), Accuracy::UpTo(b)) => Accuracy::UpTo(a.min(b)),
        }
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Accuracy::Exact => write!(f, "exact"),
            Accuracy::UpTo(w) => write!(f, "up to order {w}"),
        }
    }
}

/// A quiver with potential at a fixed truncation order.
///
/// The potential keeps one representative cycle per cyclic class. Constructors
/// store cyclic normal forms; [`normalize_c3`] may rotate them.
#[derive(Clone, Debug)]
pub struct Qp<K> {
    quiver: GradedQuiver,
    potential: Series<K>,
    truncation: usize,
    accuracy: Accuracy,
}

impl<K: Coeff> PartialEq for Qp<K> {
    fn eq(&self, other: &Self) -> bool {
        self.quiver == other.quiver
            && self.truncation == other.truncation
            && self.canonical_potential() == other.canonical_potential()
    }
}

impl<K: Coeff> Qp<K> {
    pub fn new(quiver: GradedQuiver, potential: Series<K>, truncation: usize) -> Result<Self, QpError> {
        let mut q = Qp::with_representatives(quiver, potential, truncation)?;
        q.potential = normalize_cycles(&q.quiver, &q.potential)?;
        Ok(q)
    }

    /// Like [`Qp::new`] but keeps the given cycle rotations (after merging
    /// cyclically equivalent terms onto the first representative seen).
    pub fn with_representatives(quiver: GradedQuiver, potential: Series<K>, truncation: usize) -> Result<Self, QpError> {
        if truncation < 2 {
            return Err(QpError::TruncationTooSmall(truncation));
        }
        if let Some(a) = quiver.arrows().iter().find(|a| a.degree != 0) {
            return Err(QpError::GradedArrow(a.name.clone()));
        }
        let potential = potential.with_order(truncation);
        for (p, _) in potential.terms() {
            if !p.is_cycle() {
                return Err(QpError::NotACycle(quiver.path_name(p)));
            }
            if p.len() < 2 {
                return Err(QpError::NotInM2(quiver.path_name(p)));
            }
        }
        let potential = merge_classes(&quiver, &potential)?;
        Ok(Qp { quiver, potential, truncation, accuracy: Accuracy::Exact })
    }

    pub fn with_accuracy(mut self, accuracy: Accuracy) -> Self {
        self.accuracy = accuracy;
        self
    }

    pub fn quiver(&self) -> &GradedQuiver {
        &self.quiver
    }

    pub fn potential(&self) -> &Series<K> {
        &self.potential
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn accuracy(&self) -> Accuracy {
        self.accuracy
    }

    /// Highest path length of the potential known to be correct.
    pub fn watermark(&self) -> usize {
        self.accuracy.order(self.truncation)
    }

    pub fn canonical_potential(&self) -> Series<K> {
        normalize_cycles(&self.quiver, &self.potential).expect("potential terms are cycles")
    }

    /// Same QP at a different truncation order. Lowering keeps exactness of the
    /// retained terms; raising is only exact for exact potentials.
    pub fn with_truncation(&self, n: usize) -> Result<Self, QpError> {
        let accuracy = match self.accuracy {
            Accuracy::Exact if self.potential.max_len().unwrap_or(0) <= n => Accuracy::Exact,
            Accuracy::Exact => Accuracy::UpTo(n),
            Accuracy::UpTo(w) => Accuracy::UpTo(w.min(n)),
        };
        Ok(Qp::with_representatives(self.quiver.clone(), self.potential.with_order(n), n)?.with_accuracy(accuracy))
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId, QpError> {
        Ok(self.quiver.vertex_id(name)?)
    }

    /// The cyclic derivative `∂_a W` for every arrow, accurate to the
    /// watermark minus one.
    pub fn derivatives(&self) -> Vec<Series<K>> {
        self.quiver
            .arrow_ids()
            .map(|a| crate::ncseries::cyclic_derivative(&self.quiver, &self.quiver.arrow_path(a), &self.potential))
            .collect()
    }
}

fn merge_classes<K: Coeff>(q: &GradedQuiver, w: &Series<K>) -> Result<Series<K>, SeriesError> {
    let mut reps: std::collections::HashMap<Path, Path> = std::collections::HashMap::new();
    let mut out = Series::zero(w.order());
    for (p, c) in w.terms() {
        let (n, _) = cyclic_normalize(q, p)?;
        let rep = reps.entry(n).or_insert_with(|| p.clone()).clone();
        out.add_term(rep, c.clone());
    }
    Ok(out)
}

/// Per-vertex mutability flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexReport {
    pub vertex: String,
    /// A loop at the vertex violates (c1).
    pub has_loop: bool,
    /// The vertex lies on a 2-cycle, violating (c2).
    pub on_two_cycle: bool,
    /// Some stored cycle of the potential starts and ends here (c3 fails until normalized).
    pub cycle_split_here: bool,
    pub mutable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub in_m2: bool,
    pub cyclically_normalized: bool,
    pub degree_zero: bool,
    pub vertices: Vec<VertexReport>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.in_m2 && self.degree_zero
    }
}

pub fn validate_qp<K: Coeff>(q: &Qp<K>) -> ValidationReport {
    let quiver = &q.quiver;
    let in_m2 = q.potential.terms().all(|(p, _)| p.len() >= 2);
    let cyclically_normalized = q.potential == q.canonical_potential();
    let vertices = quiver
        .vertices()
        .map(|v| {
            let has_loop = quiver.has_loop_at(v);
            let on_two_cycle = quiver.on_two_cycle(v);
            VertexReport {
                vertex: quiver.vertex_name(v).to_string(),
                has_loop,
                on_two_cycle,
                cycle_split_here: q.potential.terms().any(|(p, _)| p.source() == v),
                mutable: !has_loop && !on_two_cycle,
            }
        })
        .collect();
    ValidationReport { in_m2, cyclically_normalized, degree_zero: quiver.is_ungraded(), vertices }
}

/// Checks (c1) and (c2) at `i`.
pub fn check_mutable<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<(), QpError> {
    let name = || q.quiver.vertex_name(i).to_string();
    if q.quiver.has_loop_at(i) {
        return Err(QpError::LoopAtVertex(name()));
    }
    if q.quiver.on_two_cycle(i) {
        return Err(QpError::TwoCycleAtVertex(name()));
    }
    Ok(())
}

/// Rotates every cycle so that it neither starts nor ends at `i`, choosing
/// the lexicographically smallest admissible rotation.
pub fn normalize_c3<K: Coeff>(q: &Qp<K>, i: VertexId) -> Result<Qp<K>, QpError> {
    if q.quiver.has_loop_at(i) {
        return Err(QpError::LoopAtVertex(q.quiver.vertex_name(i).to_string()));
    }
    let mut w = Series::zero(q.truncation);
    for (p, c) in q.potential.terms() {
        let (canon, _) = cyclic_normalize(&q.quiver, p)?;
        let n = canon.len();
        let rep = (0..n)
            .map(|k| canon.rotate_left(&q.quiver, k))
            .find(|r| r.source() != i)
            .expect("a cycle avoiding loops at i visits another vertex");
        w.add_term(rep, c.clone());
    }
    Ok(Qp { quiver: q.quiver.clone(), potential: w, truncation: q.truncation, accuracy: q.accuracy })
}

/// `q1 ⊕ q2` on a common vertex set.
pub fn direct_sum<K: Coeff>(q1: &Qp<K>, q2: &Qp<K>) -> Result<Qp<K>, QpError> {
    if q1.quiver.vertex_names() != q2.quiver.vertex_names() {
        return Err(QpError::VertexSetMismatch);
    }
    if q1.truncation != q2.truncation {
        return Err(SeriesError::TruncationMismatch { left: q1.truncation, right: q2.truncation }.into());
    }
    let mut quiver = q1.quiver.clone();
    let mut map = Vec::new();
    for a in q2.quiver.arrows() {
        let id = quiver
            .add_arrow(a.name.clone(), a.source, a.target, a.degree)
            .map_err(|_| QpError::ArrowNameClash(a.name.clone()))?;
        map.push(id);
    }
    let mut w = q1.potential.clone();
    for (p, c) in q2.potential.terms() {
        w.add_term(p.map_arrows(&quiver, |a| map[a.index()]), c.clone());
    }
    Ok(Qp::new(quiver, w, q1.truncation)?.with_accuracy(q1.accuracy.min(q2.accuracy)))
}

/// The QP `(φ.target, φ(W))`, with the potential cyclically normalized.
pub fn apply_equiv<K: Coeff>(phi: &Substitution<K>, q: &Qp<K>) -> Result<Qp<K>, QpError> {
    if phi.source() != &q.quiver {
        return Err(SeriesError::InvalidSubstitution("substitution source differs from the quiver".into()).into());
    }
    let w = phi.substitute(&q.potential)?;
    let accuracy = if phi.is_identity() { q.accuracy } else { q.accuracy.min(Accuracy::UpTo(q.truncation)) };
    Ok(Qp::new(phi.target().clone(), w, q.truncation)?.with_accuracy(accuracy))
}

impl<K: Coeff> fmt::Display for Qp<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\nW = {}", self.quiver, self.potential.display(&self.quiver))
    }
}
