//! The degree-0 criterion on a QP with infinite-dimensional Jacobian algebra
//! and on one with a finite-dimensional one.

use qpcalc::corpus;
use qpcalc::field::Rational;
use qpcalc::ginzburg::degree0_criterion;

fn main() {
    for (label, q) in [("K2", corpus::k2::<Rational>(6)), ("C3", corpus::c3(6))] {
        for i in q.quiver().vertices() {
            for n in [5, 6] {
                let r = degree0_criterion(&q, i, n).unwrap();
                println!(
                    "{label} vertex {} n={n} window {}: interior {:?} -> {}",
                    r.vertex,
                    r.window,
                    r.interior,
                    if r.consistent { "consistent" } else { "inconsistent" }
                );
            }
        }
    }
}
