use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::path::{Path, Word};
use super::SeriesError;

/// Index of a vertex in its quiver's declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

/// Index of an arrow in its quiver's declaration order.
///
/// Arrow order doubles as the lexicographic order used for cyclic normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArrowId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ArrowId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub source: VertexId,
    pub target: VertexId,
    pub degree: i32,
}

/// A finite quiver whose arrows carry an integer (cohomological) degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedQuiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    vertex_index: HashMap<String, VertexId>,
    arrow_index: HashMap<String, ArrowId>,
}

impl GradedQuiver {
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>) -> Result<Self, SeriesError> {
        let mut q = GradedQuiver {
            vertices: Vec::new(),
            arrows: Vec::new(),
            vertex_index: HashMap::new(),
            arrow_index: HashMap::new(),
        };
        for v in vertices {
            q.add_vertex(v)?;
        }
        Ok(q)
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> Result<VertexId, SeriesError> {
        let name = name.into();
        if self.vertex_index.contains_key(&name) {
            return Err(SeriesError::DuplicateVertex(name));
        }
        let id = VertexId(self.vertices.len() as u32);
        self.vertex_index.insert(name.clone(), id);
        self.vertices.push(name);
        Ok(id)
    }

    pub fn add_arrow(
        &mut self,
        name: impl Into<String>,
        source: VertexId,
        target: VertexId,
        degree: i32,
    ) -> Result<ArrowId, SeriesError> {
        let name = name.into();
        if self.arrow_index.contains_key(&name) {
            return Err(SeriesError::DuplicateArrow(name));
        }
        if source.index() >= self.vertices.len() || target.index() >= self.vertices.len() {
            return Err(SeriesError::UnknownVertex(format!("{name}: endpoint out of range")));
        }
        let id = ArrowId(self.arrows.len() as u32);
        self.arrow_index.insert(name.clone(), id);
        self.arrows.push(Arrow { name, source, target, degree });
        Ok(id)
    }

    /// Adds an arrow between named vertices.
    pub fn add_arrow_named(&mut self, name: &str, source: &str, target: &str, degree: i32) -> Result<ArrowId, SeriesError> {
        let s = self.vertex_id(source)?;
        let t = self.vertex_id(target)?;
        self.add_arrow(name, s, t, degree)
    }

    /// Returns a name not yet used by any arrow, starting from `base`.
    pub fn fresh_arrow_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.arrow_index.contains_key(&name) {
            name.push('\'');
        }
        name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len() as u32).map(ArrowId)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.index()]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.index()]
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId, SeriesError> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| SeriesError::UnknownVertex(name.to_string()))
    }

    pub fn arrow_id(&self, name: &str) -> Result<ArrowId, SeriesError> {
        self.arrow_index
            .get(name)
            .copied()
            .ok_or_else(|| SeriesError::UnknownArrow(name.to_string()))
    }

    pub fn source(&self, a: ArrowId) -> VertexId {
        self.arrows[a.index()].source
    }

    pub fn target(&self, a: ArrowId) -> VertexId {
        self.arrows[a.index()].target
    }

    pub fn degree(&self, a: ArrowId) -> i32 {
        self.arrows[a.index()].degree
    }

    pub fn arrows_from(&self, v: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.source(a) == v)
    }

    pub fn arrows_into(&self, v: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.target(a) == v)
    }

    pub fn arrows_between(&self, s: VertexId, t: VertexId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.source(a) == s && self.target(a) == t)
    }

    pub fn has_loop_at(&self, v: VertexId) -> bool {
        self.arrows.iter().any(|a| a.source == v && a.target == v)
    }

    /// True when some pair of arrows `v -> w`, `w -> v` with `w != v` exists.
    pub fn on_two_cycle(&self, v: VertexId) -> bool {
        self.arrows
            .iter()
            .filter(|a| a.source == v && a.target != v)
            .any(|a| self.arrows.iter().any(|b| b.source == a.target && b.target == v))
    }

    pub fn is_ungraded(&self) -> bool {
        self.arrows.iter().all(|a| a.degree == 0)
    }

    /// Builds a path from a word (leftmost arrow applied last).
    pub fn path(&self, word: &[ArrowId]) -> Result<Path, SeriesError> {
        let Some((&last, _)) = word.split_last() else {
            return Err(SeriesError::EmptyWord);
        };
        for pair in word.windows(2) {
            if self.source(pair[0]) != self.target(pair[1]) {
                return Err(SeriesError::NotComposable(self.word_name(word)));
            }
        }
        let degree = word.iter().map(|&a| self.degree(a)).sum();
        Ok(Path::from_parts(self.source(last), self.target(word[0]), degree, Word::from_slice(word)))
    }

    /// Parses a dot-separated word of arrow names. Dots inside brackets belong
    /// to composite names such as `[a.b]`.
    pub fn path_from_names(&self, names: &str) -> Result<Path, SeriesError> {
        let word = split_word(names)
            .into_iter()
            .map(|n| self.arrow_id(n.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        self.path(&word)
    }

    pub fn arrow_path(&self, a: ArrowId) -> Path {
        Path::from_parts(self.source(a), self.target(a), self.degree(a), Word::from_slice(&[a]))
    }

    pub fn word_name(&self, word: &[ArrowId]) -> String {
        word.iter().map(|&a| self.arrow(a).name.as_str()).collect::<Vec<_>>().join(".")
    }

    pub fn path_name(&self, p: &Path) -> String {
        if p.is_lazy() {
            format!("e{}", self.vertex_name(p.source()))
        } else {
            self.word_name(p.word())
        }
    }

    /// All paths of length at most `max_len` (lazy paths included), ordered by
    /// length and then by word.
    pub fn paths_up_to(&self, max_len: usize) -> Vec<Path> {
        let mut out: Vec<Path> = self.vertices().map(Path::lazy).collect();
        let mut frontier = out.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                for a in self.arrows_from(p.target()) {
                    next.push(self.arrow_path(a).compose_unchecked(p));
                }
            }
            next.sort_by(|x, y| x.word().cmp(y.word()));
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Count of arrows per `(source, target, degree)`, the invariant compared by
    /// the reduction and involution reports.
    pub fn arrow_multiset(&self) -> std::collections::BTreeMap<(VertexId, VertexId, i32), usize> {
        let mut m = std::collections::BTreeMap::new();
        for a in &self.arrows {
            *m.entry((a.source, a.target, a.degree)).or_insert(0) += 1;
        }
        m
    }

    /// The subquiver keeping the arrows selected by `keep`, in their original
    /// order. Returns the new quiver and the old-to-new arrow map.
    pub fn restrict_arrows(&self, keep: impl Fn(ArrowId) -> bool) -> (GradedQuiver, Vec<Option<ArrowId>>) {
        let mut q = GradedQuiver::new(self.vertices.iter().cloned()).expect("vertex names are unique");
        let mut map = vec![None; self.arrows.len()];
        for a in self.arrow_ids() {
            if keep(a) {
                let arr = self.arrow(a);
                let id = q
                    .add_arrow(arr.name.clone(), arr.source, arr.target, arr.degree)
                    .expect("arrow names are unique");
                map[a.index()] = Some(id);
            }
        }
        (q, map)
    }
}

/// Splits a word at dots outside brackets.
pub fn split_word(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            '.' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Display for GradedQuiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vertices {}", self.vertices.join(" "))?;
        for a in &self.arrows {
            write!(f, "\n{}: {} -> {}", a.name, self.vertices[a.source.index()], self.vertices[a.target.index()])?;
            if a.degree != 0 {
                write!(f, " (deg {})", a.degree)?;
            }
        }
        Ok(())
    }
}
