//! The bimodule relating the Ginzburg algebras of a QP and its mutation:
//! verify its defining identities, then catch an injected sign error.

use qpcalc::corpus;
use qpcalc::dgmod::BimoduleData;
use qpcalc::field::Rational;

fn main() {
    let q = corpus::a2::<Rational>(6);
    let i = q.vertex("2").unwrap();
    let b = BimoduleData::new(&q, i).unwrap();
    let report = b.verify();
    for c in &report.checks {
        println!("{}  {}", if c.passed { "pass" } else { "FAIL" }, c.identity);
    }
    println!("all passed at order {}: {}", report.order, report.passed());

    let mut faulty = b.clone();
    faulty.negate_map("b*").unwrap();
    let failed: Vec<_> = faulty.verify().failures().map(|c| c.identity.clone()).collect();
    println!("with b* negated, failing: {failed:?}");

    for j in b.mutation().result().quiver().vertices() {
        let (_, h) = b.image_of_simple(j, 6).unwrap();
        println!("image of S'{}: {:?}", b.mutation().result().quiver().vertex_name(j), h.support());
    }
}
