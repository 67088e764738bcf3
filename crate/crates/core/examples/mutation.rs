//! Mutate the 3-cycle at a vertex, show what changed, and mutate back.

use qpcalc::corpus;
use qpcalc::field::Rational;
use qpcalc::format;
use qpcalc::mutation::{involution_report, mutate, premutate};

fn main() {
    let q = corpus::c3::<Rational>(6);
    let i = q.vertex("1").unwrap();

    let pre = premutate(&q, i).unwrap();
    println!("premutation at 1:\n{}", format::print_qp(&pre.premutated));

    let m = mutate(&q, i).unwrap();
    println!("mutation at 1:\n{}", format::print_qp(m.result()));
    println!("delta: {}", serde_json::to_string(&m.delta(&q)).unwrap());

    let back = mutate(m.result(), m.result().vertex("1").unwrap()).unwrap();
    println!("mutated twice:\n{}", format::print_qp(back.result()));

    let r = involution_report(&q, i).unwrap();
    println!("involution check passed: {}", r.passed());
}
