//! Graded quivers, paths, truncated noncommutative series and substitutions.

mod cyclic;
mod path;
mod quiver;
mod series;
mod substitution;

pub use cyclic::{cyclic_derivative, cyclic_normalize, cyclically_equivalent, normalize_cycles};
pub use path::{Path, Word};
pub use quiver::{split_word, Arrow, ArrowId, GradedQuiver, VertexId};
pub use series::{Series, SeriesDisplay};
pub use substitution::Substitution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow `{0}`")]
    DuplicateArrow(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("empty word")]
    EmptyWord,
    #[error("word not composable: {0}")]
    NotComposable(String),
    #[error("truncation mismatch: order {left} vs order {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("path is not a cycle")]
    NotACycle,
    #[error("linear part of substitution is singular")]
    SingularLinearPart,
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
}
