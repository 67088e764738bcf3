use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::field::Coeff;

use super::path::Path;
use super::quiver::{GradedQuiver, VertexId};
use super::SeriesError;

/// A truncated noncommutative formal series: a finite sum of paths of length
/// at most `order`, i.e. an element of the completed path algebra modulo
/// `m^(order+1)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Series<K> {
    order: usize,
    terms: BTreeMap<Path, K>,
}

impl<K: Coeff> Series<K> {
    pub fn zero(order: usize) -> Self {
        Series { order, terms: BTreeMap::new() }
    }

    pub fn monomial(path: Path, coeff: K, order: usize) -> Self {
        let mut s = Series::zero(order);
        s.add_term(path, coeff);
        s
    }

    pub fn lazy(v: VertexId, order: usize) -> Self {
        Series::monomial(Path::lazy(v), K::one(), order)
    }

    /// Builds a series, dropping zero coefficients and terms longer than `order`.
    pub fn from_terms(order: usize, terms: impl IntoIterator<Item = (Path, K)>) -> Self {
        let mut s = Series::zero(order);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Path, &K)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Path, K> {
        self.terms
    }

    pub fn coeff(&self, p: &Path) -> K {
        self.terms.get(p).cloned().unwrap_or_else(K::zero)
    }

    /// Adds `c·p`; silently drops the term when `p` is longer than the order.
    pub fn add_term(&mut self, p: Path, c: K) {
        if c.is_zero() || p.len() > self.order {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order != other.order {
            return Err(SeriesError::TruncationMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, other: &Self, c: &K) -> Result<(), SeriesError> {
        self.check(other)?;
        if c.is_zero() {
            return Ok(());
        }
        for (p, v) in &other.terms {
            self.add_term(p.clone(), v.mul(c));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        let mut s = self.clone();
        s.add_scaled(other, &K::one())?;
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        let mut s = self.clone();
        s.add_scaled(other, &K::one().neg())?;
        Ok(s)
    }

    pub fn neg(&self) -> Self {
        self.scale(&K::one().neg())
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Series::zero(self.order);
        }
        Series { order: self.order, terms: self.terms.iter().map(|(p, v)| (p.clone(), v.mul(c))).collect() }
    }

    /// Product truncated at the common order. Multiplication is sign-free.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        Ok(self.mul_into_order(other, self.order))
    }

    /// Product keeping terms up to `order`, regardless of the factor orders.
    /// Callers are responsible for the accuracy of the result.
    pub(crate) fn mul_into_order(&self, other: &Self, order: usize) -> Self {
        if self.is_zero() || other.is_zero() {
            return Series::zero(order);
        }
        let mut by_target: HashMap<VertexId, Vec<(&Path, &K)>> = HashMap::new();
        for (q, c) in &other.terms {
            by_target.entry(q.target()).or_default().push((q, c));
        }
        let mut acc: HashMap<Path, K> = HashMap::new();
        for (p, a) in &self.terms {
            let Some(rhs) = by_target.get(&p.source()) else { continue };
            for &(q, b) in rhs {
                if p.len() + q.len() > order {
                    continue;
                }
                let pq = p.compose_unchecked(q);
                match acc.get_mut(&pq) {
                    Some(v) => v.add_mul_assign(a, b),
                    None => {
                        acc.insert(pq, a.mul(b));
                    }
                }
            }
        }
        Series { order, terms: acc.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    /// `p · self` for a single path `p`.
    pub fn left_mul_path(&self, p: &Path) -> Self {
        let mut s = Series::zero(self.order);
        for (q, c) in &self.terms {
            if q.target() == p.source() && p.len() + q.len() <= self.order {
                s.terms.insert(p.compose_unchecked(q), c.clone());
            }
        }
        s
    }

    /// `self · p` for a single path `p`.
    pub fn right_mul_path(&self, p: &Path) -> Self {
        let mut s = Series::zero(self.order);
        for (q, c) in &self.terms {
            if q.source() == p.target() && p.len() + q.len() <= self.order {
                s.terms.insert(q.compose_unchecked(p), c.clone());
            }
        }
        s
    }

    /// Drops terms longer than `m` and lowers the order to `m` (`m <= order`).
    pub fn truncate(&self, m: usize) -> Self {
        assert!(m <= self.order, "truncate can only lower the order");
        Series { order: m, terms: self.terms.iter().filter(|(p, _)| p.len() <= m).map(|(p, c)| (p.clone(), c.clone())).collect() }
    }

    /// Relabels the order to `m`, truncating if `m` is lower. Raising the order
    /// asserts that the missing terms vanish; accuracy is the caller's business.
    pub fn with_order(&self, m: usize) -> Self {
        if m <= self.order {
            self.truncate(m)
        } else {
            Series { order: m, terms: self.terms.clone() }
        }
    }

    /// The homogeneous part of path length `l`.
    pub fn part_of_length(&self, l: usize) -> Self {
        Series { order: self.order, terms: self.terms.iter().filter(|(p, _)| p.len() == l).map(|(p, c)| (p.clone(), c.clone())).collect() }
    }

    /// Shortest term length, or `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).min()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).max()
    }

    /// `e_t · self · e_s`
    pub fn restrict_endpoints(&self, s: VertexId, t: VertexId) -> Self {
        Series {
            order: self.order,
            terms: self.terms.iter().filter(|(p, _)| p.source() == s && p.target() == t).map(|(p, c)| (p.clone(), c.clone())).collect(),
        }
    }

    pub fn retain(&mut self, f: impl Fn(&Path, &K) -> bool) {
        self.terms.retain(|p, c| f(p, c));
    }

    /// Applies `f` to every path, summing coefficients of collisions.
    pub fn map_paths(&self, order: usize, f: impl Fn(&Path) -> Path) -> Self {
        Series::from_terms(order, self.terms.iter().map(|(p, c)| (f(p), c.clone())))
    }

    /// All terms have the given endpoints and degree.
    pub fn is_homogeneous(&self, s: VertexId, t: VertexId, degree: i32) -> bool {
        self.terms.keys().all(|p| p.source() == s && p.target() == t && p.degree() == degree)
    }

    /// Renders with arrow names, e.g. `a.b - 2 c` (zero prints as `0`).
    pub fn display<'a>(&'a self, q: &'a GradedQuiver) -> SeriesDisplay<'a, K> {
        SeriesDisplay { series: self, quiver: q }
    }
}

impl<K: fmt::Debug> fmt::Debug for Series<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(order {}; ", self.order)?;
        let mut first = true;
        for (p, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}*{:?}", p.word().iter().map(|a| a.0).collect::<Vec<_>>())?;
            if p.is_lazy() {
                write!(f, "e{}", p.source().0)?;
            }
        }
        write!(f, ")")
    }
}

pub struct SeriesDisplay<'a, K> {
    series: &'a Series<K>,
    quiver: &'a GradedQuiver,
}

impl<K: Coeff> fmt::Display for SeriesDisplay<'_, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.series.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.series.terms().collect();
        terms.sort_by(|(p, _), (q, _)| p.len().cmp(&q.len()).then(p.word().cmp(q.word())));
        for (k, (p, c)) in terms.into_iter().enumerate() {
            let s = c.to_string();
            let (neg, abs) = match s.strip_prefix('-') {
                Some(r) => (true, r.to_string()),
                None => (false, s),
            };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if abs != "1" {
                write!(f, "{abs} ")?;
            }
            write!(f, "{}", self.quiver.path_name(p))?;
        }
        Ok(())
    }
}
