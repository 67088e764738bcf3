//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use qpcalc::corpus;
use qpcalc::dgmod::{cofibrant_simple, hom_dims_to_simple, phi_interval, BimoduleData};
use qpcalc::field::{Coeff, Rational};
use qpcalc::ginzburg::{degree0_criterion, truncation_homology, GinzburgAlgebra};
use qpcalc::mutation::involution_report;
use qpcalc::ncseries::{cyclic_derivative, cyclically_equivalent, ArrowId, GradedQuiver, Series, Substitution, VertexId};
use qpcalc::qp::{apply_equiv, check_mutable, direct_sum, jacobian_dims, split, Qp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 6;
type Q = Qp<Rational>;
type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

fn mutable_pairs(corpus: &[(String, Q)]) -> Vec<(String, Q, VertexId)> {
    let mut out = Vec::new();
    for (label, q) in corpus {
        for i in q.quiver().vertices() {
            if check_mutable(q, i).is_ok() {
                out.push((format!("{label}@{}", q.quiver().vertex_name(i)), q.clone(), i));
            }
        }
    }
    out
}

fn d_squared(corpus: &[(String, Q)]) -> Outcome {
    for (label, q) in corpus {
        let g = GinzburgAlgebra::new(q).map_err(err(label))?;
        ensure!(g.check_d_squared(), "{label}: d² ≠ 0 on {:?}", g.d_squared_failures());
    }
    Ok(format!("{} QPs", corpus.len()))
}

fn h0_is_jacobian(corpus: &[(String, Q)]) -> Outcome {
    let orders: Vec<usize> = (1..=N).collect();
    for (label, q) in corpus {
        let g = GinzburgAlgebra::new(q).map_err(err(label))?;
        let t = truncation_homology(&g, &orders, &[-1, 0]).map_err(err(label))?;
        let jac = jacobian_dims(q, 1..=N).map_err(err(label))?;
        ensure!(t.row(0) == Some(&jac[..]), "{label}: H0 {:?} vs Jacobian {jac:?}", t.row(0));
    }
    Ok(format!("{} QPs, orders 1..={N}", corpus.len()))
}

/// The reduced potential written on the quiver it was split from.
fn embed(big: &GradedQuiver, small: &Q) -> Result<Series<Rational>, String> {
    let sq = small.quiver();
    let mut out = Series::zero(small.truncation());
    for (p, c) in small.potential().terms() {
        let ids: Vec<ArrowId> = p
            .word()
            .iter()
            .map(|&a| big.arrow_id(&sq.arrow(a).name))
            .collect::<Result<_, _>>()
            .map_err(err("embedding"))?;
        out.add_term(big.path(&ids).map_err(err("embedding"))?, c.clone());
    }
    Ok(out)
}

fn splitting(corpus: &[(String, Q)]) -> Outcome {
    for (label, q) in corpus {
        let sum = direct_sum(q, &corpus::trivial_for(q)).map_err(err(label))?;
        let s = split(&sum).map_err(err(label))?;
        let image = apply_equiv(&s.witness, &sum).map_err(err(label))?;
        let expected = s.trivial_potential.add(&embed(sum.quiver(), &s.reduced)?).map_err(err(label))?;
        ensure!(
            cyclically_equivalent(sum.quiver(), image.potential(), &expected).map_err(err(label))?,
            "{label}: witness image {} differs from Σab + W_red",
            image.potential().display(sum.quiver())
        );
        let alone = split(q).map_err(err(label))?.reduced;
        ensure!(
            s.reduced.quiver().arrow_multiset() == alone.quiver().arrow_multiset(),
            "{label}: reduced arrows differ"
        );
        let k = N.min(s.reduced.watermark()).min(alone.watermark());
        let (a, b) = (jacobian_dims(&s.reduced, 1..=k).map_err(err(label))?, jacobian_dims(&alone, 1..=k).map_err(err(label))?);
        ensure!(a == b, "{label}: reduced Jacobian dims {a:?} vs {b:?}");
    }
    Ok(format!("{} QPs, mod m^{}", corpus.len(), N + 1))
}

fn reduction_quasi_iso(corpus: &[(String, Q)]) -> Outcome {
    let degrees = [-4, -3, -2, -1, 0];
    let orders: Vec<usize> = (1..=N).collect();
    for (label, q) in corpus {
        let sum = direct_sum(q, &corpus::trivial_for(q)).map_err(err(label))?;
        let red = split(&sum).map_err(err(label))?.reduced;
        let t1 = truncation_homology(&GinzburgAlgebra::new(&sum).map_err(err(label))?, &orders, &degrees).map_err(err(label))?;
        let t2 = truncation_homology(&GinzburgAlgebra::new(&red).map_err(err(label))?, &orders, &degrees).map_err(err(label))?;
        for &p in &degrees {
            ensure!(t1.row(p) == t2.row(p), "{label}: H^{p} {:?} vs reduced {:?}", t1.row(p), t2.row(p));
        }
    }
    Ok(format!("{} QPs, degrees -4..=0, orders 1..={N}", corpus.len()))
}

fn involution(pairs: &[(String, Q, VertexId)]) -> Outcome {
    let mut min_orders = usize::MAX;
    for (label, q, i) in pairs {
        let r = involution_report(q, *i).map_err(err(label))?;
        ensure!(r.passed(), "{label}: {r:?}");
        min_orders = min_orders.min(r.orders_compared);
    }
    ensure!(min_orders >= 4, "Jacobian dims compared only to order {min_orders}");
    Ok(format!("{} mutable pairs, dims compared to order >= {min_orders}", pairs.len()))
}

fn hom_dims(corpus: &[(String, Q)]) -> Outcome {
    let mut checked = 0;
    for (label, q) in corpus {
        let g = Arc::new(GinzburgAlgebra::new(q).map_err(err(label))?);
        let gq = g.quiver();
        for i in q.quiver().vertices() {
            let p = cofibrant_simple(&g, i).map_err(err(label))?;
            for j in q.quiver().vertices() {
                let mut expect = BTreeMap::new();
                for n in 0..=3 {
                    let count = gq.arrows().iter().filter(|a| a.source == j && a.target == i && a.degree == 1 - n).count()
                        + usize::from(i == j && n == 0);
                    if count > 0 {
                        expect.insert(n, count);
                    }
                }
                let got = hom_dims_to_simple(&p, j);
                ensure!(got == expect, "{label} P{} vs S{}: {got:?} vs {expect:?}", gq.vertex_name(i), gq.vertex_name(j));
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (i, j) pairs"))
}

fn bimodule(pairs: &[(String, Q, VertexId)]) -> Outcome {
    let mut identities = 0;
    for (label, q, i) in pairs {
        let b = BimoduleData::new(q, *i).map_err(err(label))?;
        let r = b.verify();
        ensure!(r.order >= 4, "{label}: verification order {}", r.order);
        ensure!(r.passed(), "{label}: {:?}", r.failures().collect::<Vec<_>>());
        identities += r.checks.len();
    }
    let q = corpus::a2::<Rational>(N);
    let mut b = BimoduleData::new(&q, q.vertex("2").map_err(err("A2"))?).map_err(err("A2"))?;
    b.negate_map("b*").map_err(err("A2"))?;
    ensure!(!b.verify().passed(), "fault injection on A2@2 went undetected");
    Ok(format!("{identities} identities on {} mutable pairs; fault injection detected", pairs.len()))
}

fn images_of_simples() -> Outcome {
    let mut checked = 0;
    for (label, q) in [("A2", corpus::a2::<Rational>(N)), ("C3", corpus::c3(N))] {
        let quiver = q.quiver();
        for i in quiver.vertices().filter(|&i| check_mutable(&q, i).is_ok()) {
            let b = BimoduleData::new(&q, i).map_err(err(label))?;
            for j in quiver.vertices() {
                let (_, h) = b.image_of_simple(j, N).map_err(err(label))?;
                let expect = if i == j {
                    BTreeMap::from([(-1, 1)])
                } else {
                    BTreeMap::from([(0, 1 + quiver.arrows_between(i, j).count())])
                };
                ensure!(
                    h.support() == expect,
                    "{label}@{} S'{}: {:?} vs {expect:?}",
                    quiver.vertex_name(i),
                    quiver.vertex_name(j),
                    h.support()
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (i, j) pairs"))
}

fn nearly_morita(pairs: &[(String, Q, VertexId)]) -> Outcome {
    let (mut total, mut exact) = (0, 0);
    for (label, q, i) in pairs {
        for j in q.quiver().vertices() {
            let p = phi_interval(q, *i, j, N).map_err(err(label))?;
            if j == *i {
                ensure!(p.lo == 0 && p.hi == 0, "{label}: Φ(S'_i) = [{}, {}]", p.lo, p.hi);
            } else {
                ensure!(p.lo <= p.hi, "{label} j={}: empty interval", p.vertex);
            }
            total += 1;
            exact += usize::from(p.is_exact());
        }
    }
    Ok(format!("{total} intervals, {exact} exact"))
}

// Dense oracle for the degree-0 criterion: the four-term complex written out
// on all paths of length < n, the Jacobian ideal as an explicit subspace.
mod dense {
    use super::*;

    #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
    pub struct P {
        src: usize,
        dst: usize,
        w: Vec<usize>,
    }

    type Vector = BTreeMap<usize, Rational>;
    type Comb = Vec<(P, Rational)>;

    pub struct Oracle {
        arrows: Vec<(usize, usize)>,
        n: usize,
        paths: Vec<P>,
        ideal: Vec<Comb>,
    }

    fn compose(f: &P, x: &P) -> Option<P> {
        (f.src == x.dst).then(|| P { src: x.src, dst: f.dst, w: f.w.iter().chain(&x.w).copied().collect() })
    }

    fn mul(f: &Comb, x: &P, n: usize) -> Comb {
        f.iter().filter_map(|(p, c)| compose(p, x).filter(|r| r.w.len() < n).map(|r| (r, c.clone()))).collect()
    }

    fn lmul(u: &P, f: &Comb, n: usize) -> Comb {
        f.iter().filter_map(|(p, c)| compose(u, p).filter(|r| r.w.len() < n).map(|r| (r, c.clone()))).collect()
    }

    impl Oracle {
        pub fn new(q: &Q, n: usize) -> Self {
            let quiver = q.quiver();
            let arrows: Vec<(usize, usize)> = quiver.arrows().iter().map(|a| (a.source.index(), a.target.index())).collect();
            let mut paths: Vec<P> = (0..quiver.vertex_count()).map(|v| P { src: v, dst: v, w: vec![] }).collect();
            let mut frontier = paths.clone();
            for _ in 1..n {
                let mut next = Vec::new();
                for p in &frontier {
                    for (a, &(s, t)) in arrows.iter().enumerate() {
                        if t == p.src {
                            let mut w = p.w.clone();
                            w.push(a);
                            next.push(P { src: s, dst: p.dst, w });
                        }
                    }
                }
                paths.extend(next.iter().cloned());
                frontier = next;
            }
            let mut o = Oracle { arrows, n, paths, ideal: Vec::new() };
            let terms: Vec<(Vec<usize>, Rational)> =
                q.potential().terms().map(|(p, c)| (p.word().iter().map(|a| a.index()).collect(), c.clone())).collect();
            for a in 0..o.arrows.len() {
                let r = o.derivative(&terms, &[a]);
                if r.is_empty() {
                    continue;
                }
                let (rs, rd) = (r[0].0.src, r[0].0.dst);
                for u in o.paths.iter().filter(|u| u.src == rd) {
                    for x in o.paths.iter().filter(|x| x.dst == rs) {
                        let g = mul(&lmul(u, &r, n), x, n);
                        if !g.is_empty() {
                            o.ideal.push(g);
                        }
                    }
                }
            }
            o
        }

        /// Sum over rotations of each cycle starting with `head` of what follows it.
        pub fn derivative(&self, terms: &[(Vec<usize>, Rational)], head: &[usize]) -> Comb {
            let mut acc: BTreeMap<P, Rational> = BTreeMap::new();
            for (w, c) in terms {
                let l = w.len();
                for k in 0..l {
                    if (0..head.len()).all(|m| w[(k + m) % l] == head[m]) {
                        let rest: Vec<usize> = (head.len()..l).map(|m| w[(k + m) % l]).collect();
                        let (src, dst) = match (rest.last(), rest.first()) {
                            (Some(&last), Some(&first)) => (self.arrows[last].0, self.arrows[first].1),
                            _ => (self.arrows[head[0]].0, self.arrows[head[0]].0),
                        };
                        let e = acc.entry(P { src, dst, w: rest }).or_insert_with(Rational::zero);
                        *e = e.add(c);
                    }
                }
            }
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
        }

        fn arrow(&self, a: usize) -> Comb {
            let (s, t) = self.arrows[a];
            vec![(P { src: s, dst: t, w: vec![a] }, Rational::one())]
        }

        /// Interior homology of the complex at vertex `i`, degrees -3..=0,
        /// with the window `n - h` for `h` the longest map entry.
        pub fn interior(&self, q: &Q, i: usize) -> (usize, Vec<usize>) {
            let n = self.n;
            let terms: Vec<(Vec<usize>, Rational)> =
                q.potential().terms().map(|(p, c)| (p.word().iter().map(|a| a.index()).collect(), c.clone())).collect();
            let outs: Vec<usize> = (0..self.arrows.len()).filter(|&a| self.arrows[a].0 == i).collect();
            let ins: Vec<usize> = (0..self.arrows.len()).filter(|&a| self.arrows[a].1 == i).collect();
            let summands: Vec<Vec<usize>> = vec![
                vec![i],
                outs.iter().map(|&r| self.arrows[r].1).collect(),
                ins.iter().map(|&t| self.arrows[t].0).collect(),
                vec![i],
            ];
            // maps[d]: (to, from, entry)
            let mut maps: Vec<Vec<(usize, usize, Comb)>> = vec![Vec::new(); 3];
            let mut h = 1;
            for (r, &rho) in outs.iter().enumerate() {
                maps[0].push((r, 0, self.arrow(rho)));
                for (t, &tau) in ins.iter().enumerate() {
                    let u: Comb = self.derivative(&terms, &[rho, tau]).into_iter().map(|(p, c)| (p, c.neg())).collect();
                    h = u.iter().map(|(p, _)| p.w.len()).fold(h, usize::max);
                    maps[1].push((t, r, u));
                }
            }
            for (t, &tau) in ins.iter().enumerate() {
                maps[2].push((0, t, self.arrow(tau)));
            }
            let window = n.saturating_sub(h);

            // cells of each degree: (summand, path)
            let cells: Vec<Vec<(usize, P)>> = summands
                .iter()
                .map(|vs| {
                    vs.iter()
                        .enumerate()
                        .flat_map(|(s, &v)| self.paths.iter().filter(move |p| p.dst == v).map(move |p| (s, p.clone())))
                        .collect()
                })
                .collect();
            let index: Vec<HashMap<(usize, P), usize>> =
                cells.iter().map(|c| c.iter().cloned().enumerate().map(|(k, x)| (x, k)).collect()).collect();
            let vec_of = |d: usize, s: usize, f: &Comb| -> Vector {
                let mut v = Vector::new();
                for (p, c) in f {
                    let e = v.entry(index[d][&(s, p.clone())]).or_insert_with(Rational::zero);
                    *e = e.add(c);
                }
                v.retain(|_, c| !c.is_zero());
                v
            };
            let ideal_in = |d: usize| -> Vec<Vector> {
                let mut out = Vec::new();
                for (s, &v) in summands[d].iter().enumerate() {
                    for g in self.ideal.iter().filter(|g| g[0].0.dst == v) {
                        out.push(vec_of(d, s, g));
                    }
                }
                out
            };
            let diff = |d: usize, (s, x): &(usize, P)| -> Vector {
                let mut out = Vector::new();
                if d < 3 {
                    for (to, from, f) in &maps[d] {
                        if from == s {
                            for (k, c) in vec_of(d + 1, *to, &mul(f, x, n)) {
                                let e = out.entry(k).or_insert_with(Rational::zero);
                                *e = e.add(&c);
                            }
                        }
                    }
                }
                out.retain(|_, c| !c.is_zero());
                out
            };
            let trunc = |d: usize, v: &Vector| -> Vector {
                v.iter().filter(|(&k, _)| cells[d][k].1.w.len() < window).map(|(&k, c)| (k, c.clone())).collect()
            };

            let mut dims = Vec::new();
            for d in 0..4 {
                // cycles modulo the ideal: rows (d x | x) and (g | 0), eliminated on the left block
                let mut rows: Vec<Vector> = Vec::new();
                for (k, cell) in cells[d].iter().enumerate() {
                    let mut r: Vector = diff(d, cell);
                    r.insert(BIG + k, Rational::one());
                    rows.push(r);
                }
                if d < 3 {
                    rows.extend(ideal_in(d + 1));
                }
                let reduced = echelon(rows, BIG);
                let cycles: Vec<Vector> = reduced
                    .into_iter()
                    .filter(|r| r.keys().all(|&k| k >= BIG))
                    .map(|r| r.into_iter().map(|(k, c)| (k - BIG, c)).collect::<Vector>())
                    .map(|z| trunc(d, &z))
                    .collect();
                let mut base: Vec<Vector> = ideal_in(d).iter().map(|g| trunc(d, g)).collect();
                if d > 0 {
                    for cell in cells[d - 1].iter().filter(|(_, p)| p.w.len() < window) {
                        base.push(trunc(d, &diff(d - 1, cell)));
                    }
                }
                let r0 = echelon(base.clone(), usize::MAX).len();
                base.extend(cycles);
                let r1 = echelon(base, usize::MAX).len();
                dims.push(r1 - r0);
            }
            (window, dims)
        }
    }

    const BIG: usize = 1 << 40;

    /// Gaussian elimination with pivots restricted to columns `< limit`;
    /// rows whose restricted part vanishes are kept unchanged otherwise.
    fn echelon(rows: Vec<Vector>, limit: usize) -> Vec<Vector> {
        let mut pivots: BTreeMap<usize, Vector> = BTreeMap::new();
        let mut rest = Vec::new();
        for mut r in rows {
            loop {
                r.retain(|_, c| !c.is_zero());
                let Some((&k, c)) = r.iter().find(|(&k, _)| k < limit) else {
                    if !r.is_empty() {
                        rest.push(r);
                    }
                    break;
                };
                match pivots.get(&k) {
                    Some(p) => {
                        let f = c.clone();
                        for (j, pc) in p {
                            let e = r.entry(*j).or_insert_with(Rational::zero);
                            *e = e.sub(&f.mul(pc));
                        }
                    }
                    None => {
                        let inv = c.inv().expect("nonzero pivot");
                        r.values_mut().for_each(|x| *x = x.mul(&inv));
                        pivots.insert(k, r);
                        break;
                    }
                }
            }
        }
        if limit == usize::MAX {
            return pivots.into_values().collect();
        }
        // rows left over after the restricted elimination
        let tail = echelon(rest, usize::MAX);
        pivots.into_values().chain(tail).collect()
    }
}

fn degree0() -> Outcome {
    let mut lines = Vec::new();
    for (label, q, expect) in [("K2", corpus::k2::<Rational>(N), true), ("C3", corpus::c3(N), false)] {
        for n in [5, 6] {
            let oracle = dense::Oracle::new(&q, n);
            for i in q.quiver().vertices() {
                let r = degree0_criterion(&q, i, n).map_err(err(label))?;
                let (window, dims) = oracle.interior(&q, i.index());
                let got: Vec<usize> = r.interior.iter().map(|&(_, d)| d).collect();
                let at = q.quiver().vertex_name(i);
                ensure!(window == r.window, "{label}@{at} n={n}: window {} vs oracle {window}", r.window);
                ensure!(got == dims, "{label}@{at} n={n}: interior {got:?} vs oracle {dims:?}");
                ensure!(r.consistent == expect, "{label}@{at} n={n}: consistent = {}", r.consistent);
                ensure!((dims == [0, 0, 0, 1]) == expect, "{label}@{at} n={n}: oracle disagrees with expectation");
            }
            lines.push(format!("{label} n={n}"));
        }
    }
    Ok(format!("{} confirmed by the dense oracle", lines.join(", ")))
}

fn random_series(rng: &mut ChaCha8Rng, paths: &[qpcalc::ncseries::Path], order: usize) -> Series<Rational> {
    let mut s = Series::zero(order);
    for _ in 0..rng.gen_range(1..=6) {
        let p = &paths[rng.gen_range(0..paths.len())];
        s.add_term(p.clone(), Rational::from_i64(rng.gen_range(-3..=3)));
    }
    s
}

fn kernel_properties() -> Outcome {
    const CASES: u64 = 200;
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = corpus::random_qp::<Rational>(seed, N);
        let quiver = q.quiver();

        // rotation invariance
        let mut rotated = Series::zero(N);
        for (p, c) in q.potential().terms() {
            rotated.add_term(p.rotate_left(quiver, rng.gen_range(0..p.len().max(1))), c.clone());
        }
        for a in quiver.arrow_ids() {
            let ap = quiver.arrow_path(a);
            ensure!(
                cyclic_derivative(quiver, &ap, q.potential()) == cyclic_derivative(quiver, &ap, &rotated),
                "seed {seed}: ∂_{} changes under rotation",
                quiver.arrow(a).name
            );
        }

        // inversion round trip
        let paths = quiver.paths_up_to(3);
        let images: Vec<Series<Rational>> = quiver
            .arrow_ids()
            .map(|a| {
                let lambda = [1, 2, -1, 3][rng.gen_range(0..4)];
                let mut s = Series::monomial(quiver.arrow_path(a), Rational::from_i64(lambda), N);
                for p in paths.iter().filter(|p| p.len() >= 2 && p.source() == quiver.source(a) && p.target() == quiver.target(a)) {
                    if rng.gen_bool(0.5) {
                        s.add_term(p.clone(), Rational::from_i64(rng.gen_range(-2..=2)));
                    }
                }
                s
            })
            .collect();
        let phi = Substitution::new(quiver.clone(), quiver.clone(), images, N).map_err(err("substitution"))?;
        let inv = phi.invert().map_err(err("invert"))?;
        ensure!(phi.then(&inv).map_err(err("compose"))?.is_identity(), "seed {seed}: φ then φ⁻¹ is not the identity");
        ensure!(inv.then(&phi).map_err(err("compose"))?.is_identity(), "seed {seed}: φ⁻¹ then φ is not the identity");

        // truncation coherence
        let nonlazy: Vec<_> = quiver.paths_up_to(4).into_iter().filter(|p| !p.is_lazy()).collect();
        if nonlazy.is_empty() {
            continue;
        }
        let f = random_series(&mut rng, &nonlazy, N);
        let g = random_series(&mut rng, &nonlazy, N);
        let fg = f.mul(&g).map_err(err("mul"))?;
        let phi_w = phi.substitute(q.potential()).map_err(err("substitute"))?;
        for m in 1..N {
            let lhs = f.truncate(m).mul(&g.truncate(m)).map_err(err("mul"))?;
            ensure!(lhs == fg.truncate(m), "seed {seed}: product not coherent at order {m}");
            let lhs = phi.truncate(m).substitute(&q.potential().truncate(m)).map_err(err("substitute"))?;
            ensure!(lhs == phi_w.truncate(m), "seed {seed}: substitution not coherent at order {m}");
        }
    }
    Ok(format!("{CASES} seeded cases each"))
}

fn main() {
    let corpus = corpus::corpus::<Rational>(N);
    let pairs = mutable_pairs(&corpus);
    let criteria: Vec<Criterion> = vec![
        ("d² = 0", Box::new(|| d_squared(&corpus))),
        ("H⁰ = Jacobian", Box::new(|| h0_is_jacobian(&corpus))),
        ("splitting", Box::new(|| splitting(&corpus))),
        ("reduction quasi-isomorphism", Box::new(|| reduction_quasi_iso(&corpus))),
        ("involution", Box::new(|| involution(&pairs))),
        ("hom dimensions", Box::new(|| hom_dims(&corpus))),
        ("bimodule identities", Box::new(|| bimodule(&pairs))),
        ("images of simples", Box::new(images_of_simples)),
        ("nearly Morita", Box::new(|| nearly_morita(&pairs))),
        ("degree-0 criterion", Box::new(degree0)),
        ("kernel properties", Box::new(kernel_properties)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
