//! Continuous vertex-fixing algebra homomorphisms given by arrow images.

use std::collections::BTreeMap;

use crate::field::Coeff;
use crate::linalg;

use super::path::Path;
use super::quiver::{ArrowId, GradedQuiver, VertexId};
use super::series::Series;
use super::SeriesError;

/// An algebra map sending each arrow of `source` to a series on `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution<K> {
    source: GradedQuiver,
    target: GradedQuiver,
    images: Vec<Series<K>>,
    order: usize,
}

type Block = (VertexId, VertexId, i32);

impl<K: Coeff> Substitution<K> {
    /// Validates images (endpoints, degree, no constant term) and the
    /// invertibility of the linear part.
    pub fn new(source: GradedQuiver, target: GradedQuiver, images: Vec<Series<K>>, order: usize) -> Result<Self, SeriesError> {
        if images.len() != source.arrow_count() {
            return Err(SeriesError::InvalidSubstitution(format!(
                "{} images for {} arrows",
                images.len(),
                source.arrow_count()
            )));
        }
        if source.vertex_count() != target.vertex_count() {
            return Err(SeriesError::InvalidSubstitution("vertex sets differ".into()));
        }
        for (a, img) in source.arrow_ids().zip(&images) {
            if img.order() != order {
                return Err(SeriesError::TruncationMismatch { left: order, right: img.order() });
            }
            let arr = source.arrow(a);
            if !img.is_homogeneous(arr.source, arr.target, arr.degree) || img.valuation() == Some(0) {
                return Err(SeriesError::InvalidSubstitution(format!("bad image for arrow {}", arr.name)));
            }
        }
        let s = Substitution { source, target, images, order };
        s.linear_inverse()?;
        Ok(s)
    }

    pub fn identity(q: &GradedQuiver, order: usize) -> Self {
        let images = q.arrow_ids().map(|a| Series::monomial(q.arrow_path(a), K::one(), order)).collect();
        Substitution { source: q.clone(), target: q.clone(), images, order }
    }

    /// Identity on every arrow except those listed.
    pub fn from_overrides(q: &GradedQuiver, order: usize, overrides: impl IntoIterator<Item = (ArrowId, Series<K>)>) -> Result<Self, SeriesError> {
        let mut images: Vec<Series<K>> = q.arrow_ids().map(|a| Series::monomial(q.arrow_path(a), K::one(), order)).collect();
        for (a, s) in overrides {
            images[a.index()] = s;
        }
        Substitution::new(q.clone(), q.clone(), images, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn source(&self) -> &GradedQuiver {
        &self.source
    }

    pub fn target(&self) -> &GradedQuiver {
        &self.target
    }

    pub fn image(&self, a: ArrowId) -> &Series<K> {
        &self.images[a.index()]
    }

    pub fn images(&self) -> &[Series<K>] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.source.arrow_ids().all(|a| {
            let img = &self.images[a.index()];
            img.num_terms() == 1 && img.coeff(&self.source.arrow_path(a)).is_one()
        })
    }

    /// Image of a single path, truncated at the substitution order.
    pub fn apply_path(&self, p: &Path) -> Series<K> {
        if p.is_lazy() {
            return Series::monomial(p.clone(), K::one(), self.order);
        }
        let w = p.word();
        let mut acc = self.images[w[w.len() - 1].index()].clone();
        for &a in w[..w.len() - 1].iter().rev() {
            acc = self.images[a.index()].mul_into_order(&acc, self.order);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    /// The continuous homomorphism applied to a series on the source quiver.
    pub fn substitute(&self, s: &Series<K>) -> Result<Series<K>, SeriesError> {
        if s.order() != self.order {
            return Err(SeriesError::TruncationMismatch { left: self.order, right: s.order() });
        }
        let mut out = Series::zero(self.order);
        for (p, c) in s.terms() {
            out.add_scaled(&self.apply_path(p), c)?;
        }
        Ok(out)
    }

    /// The map "apply `self`, then `then`".
    pub fn then(&self, then: &Substitution<K>) -> Result<Substitution<K>, SeriesError> {
        if then.order != self.order {
            return Err(SeriesError::TruncationMismatch { left: self.order, right: then.order });
        }
        let images = self.images.iter().map(|img| then.substitute(img)).collect::<Result<Vec<_>, _>>()?;
        Ok(Substitution { source: self.source.clone(), target: then.target.clone(), images, order: self.order })
    }

    /// Linear part blocks: for each `(s, t, deg)` the source arrows, the
    /// target arrows, and the matrix `M[a][b]` = coefficient of `b` in `φ(a)`.
    fn linear_blocks(&self) -> BTreeMap<Block, (Vec<ArrowId>, Vec<ArrowId>)> {
        let mut blocks: BTreeMap<Block, (Vec<ArrowId>, Vec<ArrowId>)> = BTreeMap::new();
        for a in self.source.arrow_ids() {
            let arr = self.source.arrow(a);
            blocks.entry((arr.source, arr.target, arr.degree)).or_default().0.push(a);
        }
        for b in self.target.arrow_ids() {
            let arr = self.target.arrow(b);
            blocks.entry((arr.source, arr.target, arr.degree)).or_default().1.push(b);
        }
        blocks
    }

    /// The inverse of the linear part, as a substitution from target to source.
    fn linear_inverse(&self) -> Result<Substitution<K>, SeriesError> {
        let mut images: Vec<Series<K>> = vec![Series::zero(self.order); self.target.arrow_count()];
        for (_, (src, tgt)) in self.linear_blocks() {
            if src.len() != tgt.len() {
                return Err(SeriesError::SingularLinearPart);
            }
            if src.is_empty() {
                continue;
            }
            let m: Vec<Vec<K>> = src
                .iter()
                .map(|&a| tgt.iter().map(|&b| self.images[a.index()].coeff(&self.target.arrow_path(b))).collect())
                .collect();
            let inv = linalg::invert(&m).ok_or(SeriesError::SingularLinearPart)?;
            for (x, &b) in tgt.iter().enumerate() {
                let terms = src.iter().enumerate().map(|(y, &a)| (self.source.arrow_path(a), inv[x][y].clone()));
                images[b.index()] = Series::from_terms(self.order, terms);
            }
        }
        Ok(Substitution { source: self.target.clone(), target: self.source.clone(), images, order: self.order })
    }

    /// The inverse homomorphism modulo `m^(N+1)`, computed order by order.
    pub fn invert(&self) -> Result<Substitution<K>, SeriesError> {
        let lin = self.linear_inverse()?;
        let mut psi = lin.clone();
        for _ in 0..self.order {
            let mut changed = false;
            for b in self.target.arrow_ids() {
                let back = self.substitute(&psi.images[b.index()])?;
                let defect = back.sub(&Series::monomial(self.target.arrow_path(b), K::one(), self.order))?;
                if defect.is_zero() {
                    continue;
                }
                changed = true;
                let corr = lin.substitute(&defect)?;
                psi.images[b.index()] = psi.images[b.index()].sub(&corr)?;
            }
            if !changed {
                break;
            }
        }
        Ok(psi)
    }

    /// Same map at a lower order.
    pub fn truncate(&self, m: usize) -> Substitution<K> {
        Substitution {
            source: self.source.clone(),
            target: self.target.clone(),
            images: self.images.iter().map(|s| s.truncate(m)).collect(),
            order: m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn two_cycle() -> GradedQuiver {
        let mut q = GradedQuiver::new(["1", "2"]).unwrap();
        q.add_arrow_named("a", "2", "1", 0).unwrap();
        q.add_arrow_named("b", "1", "2", 0).unwrap();
        q
    }

    #[test]
    fn identity_is_neutral() {
        let q = two_cycle();
        let id = Substitution::<Rational>::identity(&q, 4);
        let s = Series::monomial(q.path_from_names("a.b").unwrap(), r(3), 4);
        assert_eq!(id.substitute(&s).unwrap(), s);
        assert!(id.invert().unwrap().is_identity());
    }

    #[test]
    fn scaling_and_inverse() {
        let mut q = GradedQuiver::new(["1"]).unwrap();
        let a = q.add_arrow_named("a", "1", "1", 0).unwrap();
        let phi = Substitution::from_overrides(&q, 4, [(a, Series::monomial(q.arrow_path(a), r(2), 4))]).unwrap();
        let s = Series::monomial(q.path_from_names("a.a").unwrap(), r(1), 4);
        assert_eq!(phi.substitute(&s).unwrap(), s.scale(&r(4)));
        let inv = phi.invert().unwrap();
        assert_eq!(inv.image(a), &Series::monomial(q.arrow_path(a), Rational::new(1, 2), 4));
    }

    #[test]
    fn one_term_expansion() {
        // b -> b - c*.a* applied to [ac].b
        let mut q = GradedQuiver::new(["1", "2", "3"]).unwrap();
        let b = q.add_arrow_named("b", "2", "3", 0).unwrap();
        q.add_arrow_named("[a.c]", "3", "2", 0).unwrap();
        q.add_arrow_named("a*", "2", "1", 0).unwrap();
        q.add_arrow_named("c*", "1", "3", 0).unwrap();
        let img = Series::from_terms(6, [(q.arrow_path(b), r(1)), (q.path_from_names("c*.a*").unwrap(), r(-1))]);
        let phi = Substitution::from_overrides(&q, 6, [(b, img)]).unwrap();
        let s = Series::monomial(q.path_from_names("[a.c].b").unwrap(), r(1), 6);
        assert_eq!(phi.substitute(&s).unwrap().display(&q).to_string(), "[a.c].b - [a.c].c*.a*");
    }

    #[test]
    fn geometric_inverse() {
        let q = two_cycle();
        let b = q.arrow_id("b").unwrap();
        let img = Series::from_terms(5, [(q.arrow_path(b), r(1)), (q.path_from_names("b.a.b").unwrap(), r(1))]);
        let phi = Substitution::from_overrides(&q, 5, [(b, img)]).unwrap();
        let psi = phi.invert().unwrap();
        let expect = Series::from_terms(
            5,
            [
                (q.path_from_names("b").unwrap(), r(1)),
                (q.path_from_names("b.a.b").unwrap(), r(-1)),
                (q.path_from_names("b.a.b.a.b").unwrap(), r(2)),
            ],
        );
        assert_eq!(psi.image(b), &expect);
        let comp = phi.then(&psi).unwrap();
        assert!(comp.is_identity());
        assert!(psi.then(&phi).unwrap().is_identity());
    }

    #[test]
    fn singular_linear_part_rejected() {
        let q = two_cycle();
        let b = q.arrow_id("b").unwrap();
        let img = Series::monomial(q.path_from_names("b.a.b").unwrap(), r(1), 5);
        assert!(matches!(Substitution::from_overrides(&q, 5, [(b, img)]), Err(SeriesError::SingularLinearPart)));
    }
}
