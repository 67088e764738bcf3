//! Example QPs used across tests, examples and the CLI: the named small
//! quivers and a seeded family of random ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::Coeff;
use crate::ncseries::{GradedQuiver, Series};
use crate::qp::Qp;

fn build<K: Coeff>(vertices: &[&str], arrows: &[(&str, &str, &str)], terms: &[(i64, &str)], n: usize) -> Qp<K> {
    let mut q = GradedQuiver::new(vertices.iter().copied()).expect("distinct vertices");
    for &(name, s, t) in arrows {
        q.add_arrow_named(name, s, t, 0).expect("valid arrow");
    }
    let mut w = Series::zero(n);
    for &(c, word) in terms {
        w.add_term(q.path_from_names(word).expect("valid word"), K::from_i64(c));
    }
    Qp::new(q, w, n).expect("valid QP")
}

/// `b: 1 -> 2`, `a: 2 -> 3`, `W = 0`.
pub fn a2<K: Coeff>(n: usize) -> Qp<K> {
    build(&["1", "2", "3"], &[("b", "1", "2"), ("a", "2", "3")], &[], n)
}

/// The oriented 3-cycle with `W = c.b.a`.
pub fn c3<K: Coeff>(n: usize) -> Qp<K> {
    build(&["1", "2", "3"], &[("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")], &[(1, "c.b.a")], n)
}

/// A trivial QP: `a': 1 -> 2`, `b': 2 -> 1`, `W = a'.b'`.
pub fn triv<K: Coeff>(n: usize) -> Qp<K> {
    build(&["1", "2"], &[("a'", "1", "2"), ("b'", "2", "1")], &[(1, "a'.b'")], n)
}

/// The conifold-type quiver with `W = a1.b1.a2.b2 - a1.b2.a2.b1`.
pub fn k2<K: Coeff>(n: usize) -> Qp<K> {
    build(
        &["1", "2"],
        &[("a1", "1", "2"), ("a2", "1", "2"), ("b1", "2", "1"), ("b2", "2", "1")],
        &[(1, "a1.b1.a2.b2"), (-1, "a1.b2.a2.b1")],
        n,
    )
}

/// A 2-cycle `x: v1 -> v2`, `y: v2 -> v1` with `W = x.y` on the given vertex
/// set (which needs at least two vertices).
pub fn trivial_two_cycle<K: Coeff>(vertices: &[String], x: &str, y: &str, n: usize) -> Qp<K> {
    let mut q = GradedQuiver::new(vertices.iter().cloned()).expect("distinct vertices");
    let xa = q.add_arrow_named(x, &vertices[0], &vertices[1], 0).expect("fresh name");
    let ya = q.add_arrow_named(y, &vertices[1], &vertices[0], 0).expect("fresh name");
    let w = Series::monomial(q.path(&[xa, ya]).expect("2-cycle"), K::one(), n);
    Qp::new(q, w, n).expect("valid QP")
}

/// A trivial QP whose arrow names avoid those of `q`.
pub fn trivial_for<K: Coeff>(q: &Qp<K>) -> Qp<K> {
    let x = q.quiver().fresh_arrow_name("tx");
    let y = q.quiver().fresh_arrow_name("ty");
    trivial_two_cycle(q.quiver().vertex_names(), &x, &y, q.truncation())
}

/// A random QP: 2 to 4 vertices, at most 6 arrows, no loops, and up to four
/// potential terms of length 2 to 4 with small nonzero integer coefficients.
pub fn random_qp<K: Coeff>(seed: u64, n: usize) -> Qp<K> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.gen_range(2..=4usize);
    let names: Vec<String> = (1..=nv).map(|i| i.to_string()).collect();
    let mut q = GradedQuiver::new(names.iter().cloned()).expect("distinct vertices");
    let na = rng.gen_range(nv..=6usize);
    for k in 0..na {
        let s = rng.gen_range(0..nv);
        let mut t = rng.gen_range(0..nv - 1);
        if t >= s {
            t += 1;
        }
        q.add_arrow_named(&format!("x{}", k + 1), &names[s], &names[t], 0).expect("fresh name");
    }
    let mut w = Series::zero(n);
    let nterms = rng.gen_range(0..=4usize);
    let mut attempts = 0;
    while w.num_terms() < nterms && attempts < 200 {
        attempts += 1;
        let len = rng.gen_range(2..=4usize).min(n);
        let start = rng.gen_range(0..nv);
        let mut word = Vec::with_capacity(len);
        let mut at = crate::ncseries::VertexId(start as u32);
        for _ in 0..len {
            let outs: Vec<_> = q.arrows_into(at).collect();
            let Some(&a) = outs.choose(&mut rng) else { break };
            word.push(a);
            at = q.source(a);
        }
        if word.len() != len || at.index() != start {
            continue;
        }
        let p = q.path(&word).expect("built backwards from composable arrows");
        let mut c = rng.gen_range(1..=2i64);
        if rng.gen_bool(0.5) {
            c = -c;
        }
        w.add_term(p, K::from_i64(c));
    }
    Qp::new(q, w, n).expect("valid QP")
}

/// The 20 seeded random QPs of the corpus.
pub fn random_family<K: Coeff>(n: usize) -> Vec<Qp<K>> {
    (0..20).map(|s| random_qp(1000 + s, n)).collect()
}

/// The named examples followed by the random family, with labels.
pub fn corpus<K: Coeff>(n: usize) -> Vec<(String, Qp<K>)> {
    let mut out = vec![
        ("A2".to_string(), a2(n)),
        ("C3".to_string(), c3(n)),
        ("TRIV".to_string(), triv(n)),
        ("K2".to_string(), k2(n)),
    ];
    out.extend(random_family(n).into_iter().enumerate().map(|(i, q)| (format!("random-{i}"), q)));
    out
}
