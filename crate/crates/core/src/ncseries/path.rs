use std::cmp::Ordering;

use smallvec::SmallVec;

use super::quiver::{ArrowId, GradedQuiver, VertexId};
use super::SeriesError;

/// Arrow word, leftmost arrow applied last.
pub type Word = SmallVec<[ArrowId; 8]>;

/// A path in a graded quiver: either a lazy path `e_v` or a composable word.
///
/// Paths are ordered by `(source, target, degree, length, word)`, which is the
/// key order of [`Series`](super::Series).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Path {
    src: VertexId,
    dst: VertexId,
    degree: i32,
    word: Word,
}

impl Path {
    pub fn lazy(v: VertexId) -> Self {
        Path { src: v, dst: v, degree: 0, word: Word::new() }
    }

    /// Assembles a path from precomputed parts. The caller guarantees composability.
    pub fn from_parts(src: VertexId, dst: VertexId, degree: i32, word: Word) -> Self {
        Path { src, dst, degree, word }
    }

    pub fn source(&self) -> VertexId {
        self.src
    }

    pub fn target(&self) -> VertexId {
        self.dst
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_lazy(&self) -> bool {
        self.word.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[ArrowId] {
        &self.word
    }

    pub fn is_cycle(&self) -> bool {
        self.src == self.dst && !self.word.is_empty()
    }

    pub fn first(&self) -> Option<ArrowId> {
        self.word.first().copied()
    }

    pub fn last(&self) -> Option<ArrowId> {
        self.word.last().copied()
    }

    /// `self · other`: `other` is applied first.
    pub fn compose(&self, other: &Path) -> Result<Path, SeriesError> {
        if self.src != other.dst {
            return Err(SeriesError::NotComposable(format!(
                "source {} != target {}",
                self.src.0, other.dst.0
            )));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Path) -> Path {
        let mut word = Word::with_capacity(self.word.len() + other.word.len());
        word.extend_from_slice(&self.word);
        word.extend_from_slice(&other.word);
        Path { src: other.src, dst: self.dst, degree: self.degree + other.degree, word }
    }

    /// The factor `word[range]`, recomputing endpoints from the quiver. An empty
    /// range at position `k` yields the lazy path at the vertex between
    /// `word[k-1]` and `word[k]`.
    pub fn factor(&self, q: &GradedQuiver, start: usize, end: usize) -> Path {
        if start == end {
            let v = if start == 0 {
                self.dst
            } else if start == self.word.len() {
                self.src
            } else {
                q.source(self.word[start - 1])
            };
            return Path::lazy(v);
        }
        let slice = &self.word[start..end];
        let degree = slice.iter().map(|&a| q.degree(a)).sum();
        Path {
            src: q.source(slice[slice.len() - 1]),
            dst: q.target(slice[0]),
            degree,
            word: Word::from_slice(slice),
        }
    }

    /// Left rotation of a cycle by `k` positions: `a_{k+1} … a_s a_1 … a_k`.
    pub fn rotate_left(&self, q: &GradedQuiver, k: usize) -> Path {
        let n = self.word.len();
        if n == 0 || k.is_multiple_of(n) {
            return self.clone();
        }
        let k = k % n;
        let mut word = Word::with_capacity(n);
        word.extend_from_slice(&self.word[k..]);
        word.extend_from_slice(&self.word[..k]);
        let v = q.source(self.word[k - 1]);
        Path { src: v, dst: v, degree: self.degree, word }
    }

    /// Applies an arrow renaming (for quiver restrictions and embeddings).
    pub fn map_arrows(&self, q: &GradedQuiver, f: impl Fn(ArrowId) -> ArrowId) -> Path {
        if self.word.is_empty() {
            return self.clone();
        }
        let word: Word = self.word.iter().map(|&a| f(a)).collect();
        let degree = word.iter().map(|&a| q.degree(a)).sum();
        Path { src: q.source(*word.last().unwrap()), dst: q.target(word[0]), degree, word }
    }

    pub fn contains_arrow(&self, a: ArrowId) -> bool {
        self.word.contains(&a)
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.src
            .cmp(&other.src)
            .then(self.dst.cmp(&other.dst))
            .then(self.degree.cmp(&other.degree))
            .then(self.word.len().cmp(&other.word.len()))
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> GradedQuiver {
        let mut q = GradedQuiver::new(["1", "2", "3"]).unwrap();
        q.add_arrow_named("b", "1", "2", 0).unwrap();
        q.add_arrow_named("a", "2", "3", 0).unwrap();
        q
    }

    #[test]
    fn lazy_is_unit() {
        let q = a2();
        let b = q.arrow_path(q.arrow_id("b").unwrap());
        let e2 = Path::lazy(q.vertex_id("2").unwrap());
        assert_eq!(e2.compose(&b).unwrap(), b);
        let e1 = Path::lazy(q.vertex_id("1").unwrap());
        assert_eq!(b.compose(&e1).unwrap(), b);
    }

    #[test]
    fn composition_convention() {
        let q = a2();
        let a = q.arrow_path(q.arrow_id("a").unwrap());
        let b = q.arrow_path(q.arrow_id("b").unwrap());
        let ab = a.compose(&b).unwrap();
        assert_eq!(q.path_name(&ab), "a.b");
        assert_eq!(q.vertex_name(ab.source()), "1");
        assert_eq!(q.vertex_name(ab.target()), "3");
        assert_eq!(ab.len(), 2);
        assert!(matches!(b.compose(&a), Err(SeriesError::NotComposable(_))));
    }

    #[test]
    fn factors_and_rotation() {
        let mut q = GradedQuiver::new(["1", "2", "3"]).unwrap();
        q.add_arrow_named("a", "1", "2", 0).unwrap();
        q.add_arrow_named("b", "2", "3", 0).unwrap();
        q.add_arrow_named("c", "3", "1", 0).unwrap();
        let cba = q.path_from_names("c.b.a").unwrap();
        let r = cba.rotate_left(&q, 2);
        assert_eq!(q.path_name(&r), "a.c.b");
        assert_eq!(q.vertex_name(r.source()), "2");
        let mid = cba.factor(&q, 1, 1);
        assert_eq!(q.vertex_name(mid.source()), "3");
        assert_eq!(q.path_name(&cba.factor(&q, 1, 3)), "b.a");
    }
}
