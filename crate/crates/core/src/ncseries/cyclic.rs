//! Cyclic rotations, cyclic normal forms and cyclic derivatives.

use crate::field::Coeff;

use super::path::Path;
use super::quiver::GradedQuiver;
use super::series::Series;
use super::SeriesError;

/// Rotates a cycle to its lexicographically minimal form (arrows compared by
/// declaration order). Returns the rotated path and the number of left
/// rotations applied.
pub fn cyclic_normalize(q: &GradedQuiver, c: &Path) -> Result<(Path, usize), SeriesError> {
    if !c.is_cycle() {
        return Err(SeriesError::NotACycle);
    }
    let w = c.word();
    let n = w.len();
    let mut best = 0;
    for k in 1..n {
        let better = (0..n)
            .map(|i| w[(k + i) % n].cmp(&w[(best + i) % n]))
            .find(|o| o.is_ne())
            .is_some_and(|o| o.is_lt());
        if better {
            best = k;
        }
    }
    Ok((c.rotate_left(q, best), best))
}

/// Replaces every cycle of `w` by its cyclic normal form and sums collisions.
/// Non-cycle terms are an error.
pub fn normalize_cycles<K: Coeff>(q: &GradedQuiver, w: &Series<K>) -> Result<Series<K>, SeriesError> {
    let mut out = Series::zero(w.order());
    for (p, c) in w.terms() {
        let (n, _) = cyclic_normalize(q, p)?;
        out.add_term(n, c.clone());
    }
    Ok(out)
}

/// Sum of `c·(v u)` over every factorization `c = u p v` of every cycle of `w`
/// read cyclically, i.e. over each rotation of `c` that begins with `p`.
///
/// The result is accurate to order `N - len(p)` and carries that order.
pub fn cyclic_derivative<K: Coeff>(q: &GradedQuiver, p: &Path, w: &Series<K>) -> Series<K> {
    let order = w.order().saturating_sub(p.len());
    let mut out = Series::zero(order);
    if p.is_lazy() {
        return out;
    }
    let pw = p.word();
    for (c, coeff) in w.terms() {
        if !c.is_cycle() || c.len() < pw.len() {
            continue;
        }
        let n = c.len();
        let cw = c.word();
        for k in 0..n {
            if (0..pw.len()).all(|i| cw[(k + i) % n] == pw[i]) {
                let r = c.rotate_left(q, k);
                out.add_term(r.factor(q, pw.len(), n), coeff.clone());
            }
        }
    }
    out
}

/// True when two potentials agree after cyclic normalization.
pub fn cyclically_equivalent<K: Coeff>(q: &GradedQuiver, a: &Series<K>, b: &Series<K>) -> Result<bool, SeriesError> {
    Ok(normalize_cycles(q, a)? == normalize_cycles(q, b)?)
}
