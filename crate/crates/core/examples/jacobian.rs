//! Dimensions of truncated Jacobian algebras for the named examples.

use qpcalc::corpus;
use qpcalc::field::Rational;
use qpcalc::qp::jacobian_dims;

fn main() {
    for (label, q) in corpus::corpus::<Rational>(6).into_iter().take(4) {
        let dims = jacobian_dims(&q, 1..=6).unwrap();
        println!("{label:>5}: {dims:?}");
    }
}
