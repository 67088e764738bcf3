//! Splitting a QP into its trivial and reduced parts.

use std::collections::BTreeMap;

use crate::field::Coeff;
use crate::ncseries::{cyclic_normalize, normalize_cycles, ArrowId, GradedQuiver, Path, Series, Substitution};

use super::{Accuracy, QpError, Qp};

#[derive(Clone, Debug)]
pub struct SplitResult<K> {
    /// Pairs `(a, b)` whose products `a.b` form the trivial part.
    pub trivial_pairs: Vec<(ArrowId, ArrowId)>,
    /// The reduced QP on the quiver without trivial arrows.
    pub reduced: Qp<K>,
    /// Right-equivalence taking the input potential to `Σ a b + W_red`.
    pub witness: Substitution<K>,
    /// `Σ a_k b_k` on the input quiver.
    pub trivial_potential: Series<K>,
    /// Number of order-raising passes used after the linear step.
    pub passes: usize,
}

impl<K: Coeff> SplitResult<K> {
    pub fn trivial_pair_names(&self, q: &GradedQuiver) -> Vec<(String, String)> {
        self.trivial_pairs.iter().map(|&(a, b)| (q.arrow(a).name.clone(), q.arrow(b).name.clone())).collect()
    }
}

/// Brings the quadratic part to `Σ a_k b_k` by a linear change of arrows, then
/// removes trivial arrows from longer terms order by order.
pub fn split<K: Coeff>(q: &Qp<K>) -> Result<SplitResult<K>, QpError> {
    let quiver = q.quiver();
    let n = q.truncation();
    let w = q.canonical_potential();

    for (p, _) in w.terms() {
        if p.len() == 2 && quiver.source(p.word()[0]) == quiver.target(p.word()[0]) {
            return Err(QpError::QuadraticLoop(quiver.vertex_name(p.source()).to_string()));
        }
    }

    let (linear, pairs) = linear_step(q, &w)?;
    let mut witness = linear;
    let mut cur = normalize_cycles(quiver, &witness.substitute(&w)?)?;

    let mut partner: BTreeMap<ArrowId, ArrowId> = BTreeMap::new();
    for &(a, b) in &pairs {
        partner.insert(a, b);
        partner.insert(b, a);
    }

    let mut passes = 0;
    let mut overflowed = false;
    loop {
        let offenders: Vec<(&Path, &K)> =
            cur.terms().filter(|(p, _)| p.len() >= 3 && p.word().iter().any(|a| partner.contains_key(a))).collect();
        let Some(ell) = offenders.iter().map(|(p, _)| p.len()).min() else { break };
        if passes == n {
            return Err(QpError::SplitDidNotConverge(n));
        }
        passes += 1;
        let mut corrections: BTreeMap<ArrowId, Series<K>> = BTreeMap::new();
        for (p, c) in offenders.into_iter().filter(|(p, _)| p.len() == ell) {
            let k = p.word().iter().position(|a| partner.contains_key(a)).expect("offender has a trivial arrow");
            let rot = p.rotate_left(quiver, k);
            let t = rot.word()[0];
            let rest = rot.factor(quiver, 1, rot.len());
            // a.u is cancelled by b -> b - u; b.v by a -> a - v
            let other = partner[&t];
            corrections.entry(other).or_insert_with(|| Series::zero(n)).add_term(rest, c.clone());
        }
        let overrides: Vec<(ArrowId, Series<K>)> = corrections
            .into_iter()
            .map(|(a, corr)| {
                let img = Series::monomial(quiver.arrow_path(a), K::one(), n).sub(&corr).expect("same order");
                (a, img)
            })
            .collect();
        let step = Substitution::from_overrides(quiver, n, overrides)?;
        overflowed |= !stays_within(&step, &cur, n);
        cur = normalize_cycles(quiver, &step.substitute(&cur)?)?;
        witness = witness.then(&step)?;
    }

    let trivial: std::collections::HashSet<ArrowId> = partner.keys().copied().collect();
    let (red_quiver, map) = quiver.restrict_arrows(|a| !trivial.contains(&a));
    let mut red_w = Series::zero(n);
    let mut trivial_potential = Series::zero(n);
    for (p, c) in cur.terms() {
        if p.word().iter().any(|a| trivial.contains(a)) {
            trivial_potential.add_term(p.clone(), c.clone());
        } else {
            red_w.add_term(p.map_arrows(&red_quiver, |a| map[a.index()].expect("kept arrow")), c.clone());
        }
    }
    let expected_trivial = Series::from_terms(
        n,
        pairs.iter().map(|&(a, b)| (cyclic_normalize(quiver, &quiver.path(&[a, b]).expect("pair composes")).expect("cycle").0, K::one())),
    );
    debug_assert_eq!(trivial_potential, expected_trivial);
    let accuracy = if overflowed { q.accuracy().min(Accuracy::UpTo(n)) } else { q.accuracy() };
    let reduced = Qp::new(red_quiver, red_w, n)?.with_accuracy(accuracy);
    Ok(SplitResult { trivial_pairs: pairs, reduced, witness, trivial_potential: expected_trivial, passes })
}

/// Whether substituting into `s` keeps every product below the truncation, so
/// that nothing is lost.
fn stays_within<K: Coeff>(step: &Substitution<K>, s: &Series<K>, n: usize) -> bool {
    s.terms().all(|(p, _)| p.word().iter().map(|&a| step.image(a).max_len().unwrap_or(0)).sum::<usize>() <= n)
}

type LinearStep<K> = (Substitution<K>, Vec<(ArrowId, ArrowId)>);

/// Linear normalization of the quadratic part, one unordered vertex pair at a
/// time. Rows are arrows `i -> j`, columns arrows `j -> i` (declaration order).
fn linear_step<K: Coeff>(q: &Qp<K>, w: &Series<K>) -> Result<LinearStep<K>, QpError> {
    let quiver = q.quiver();
    let n = q.truncation();
    let mut overrides: Vec<(ArrowId, Series<K>)> = Vec::new();
    let mut pairs = Vec::new();
    let nv = quiver.vertex_count() as u32;
    for i in 0..nv {
        for j in (i + 1)..nv {
            let (vi, vj) = (crate::ncseries::VertexId(i), crate::ncseries::VertexId(j));
            let xs: Vec<ArrowId> = quiver.arrows_between(vi, vj).collect();
            let ys: Vec<ArrowId> = quiver.arrows_between(vj, vi).collect();
            if xs.is_empty() || ys.is_empty() {
                continue;
            }
            let mut m: Vec<Vec<K>> = xs
                .iter()
                .map(|&x| {
                    ys.iter()
                        .map(|&y| {
                            let p = quiver.path(&[x, y]).expect("opposite arrows compose");
                            w.coeff(&cyclic_normalize(quiver, &p).expect("cycle").0)
                        })
                        .collect()
                })
                .collect();
            if m.iter().all(|r| r.iter().all(K::is_zero)) {
                continue;
            }
            let (rows, cols) = (xs.len(), ys.len());
            let mut l: Vec<Vec<K>> = identity(rows);
            let mut u: Vec<Vec<K>> = identity(cols);
            for r in 0..rows {
                let Some(c) = (0..cols).find(|&c| !m[r][c].is_zero()) else { continue };
                let inv = m[r][c].inv().expect("nonzero");
                for row in m.iter_mut() {
                    row[c] = row[c].mul(&inv);
                }
                for row in u.iter_mut() {
                    row[c] = row[c].mul(&inv);
                }
                for c2 in 0..cols {
                    if c2 != c && !m[r][c2].is_zero() {
                        let f = m[r][c2].neg();
                        for row in m.iter_mut() {
                            let v = row[c].clone();
                            row[c2].add_mul_assign(&f, &v);
                        }
                        for row in u.iter_mut() {
                            let v = row[c].clone();
                            row[c2].add_mul_assign(&f, &v);
                        }
                    }
                }
                for r2 in 0..rows {
                    if r2 != r && !m[r2][c].is_zero() {
                        let f = m[r2][c].neg();
                        let (mr, lr) = (m[r].clone(), l[r].clone());
                        for (x, y) in m[r2].iter_mut().zip(&mr) {
                            x.add_mul_assign(&f, y);
                        }
                        for (x, y) in l[r2].iter_mut().zip(&lr) {
                            x.add_mul_assign(&f, y);
                        }
                    }
                }
                pairs.push((xs[r], ys[c]));
            }
            // x_r -> Σ L[r'][r] x_r',  y_s -> Σ U[s][s'] y_s'
            for (r, &x) in xs.iter().enumerate() {
                let img = Series::from_terms(n, xs.iter().enumerate().map(|(r2, &x2)| (quiver.arrow_path(x2), l[r2][r].clone())));
                overrides.push((x, img));
            }
            for (s, &y) in ys.iter().enumerate() {
                let img = Series::from_terms(n, ys.iter().enumerate().map(|(s2, &y2)| (quiver.arrow_path(y2), u[s][s2].clone())));
                overrides.push((y, img));
            }
        }
    }
    pairs.sort();
    Ok((Substitution::from_overrides(quiver, n, overrides)?, pairs))
}

fn identity<K: Coeff>(n: usize) -> Vec<Vec<K>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { K::one() } else { K::zero() }).collect()).collect()
}
