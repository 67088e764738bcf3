//! Split a QP with a quadratic part into its trivial and reduced parts and
//! check the right-equivalence witness.

use qpcalc::corpus;
use qpcalc::field::Rational;
use qpcalc::format;
use qpcalc::qp::{apply_equiv, direct_sum, split};

fn main() {
    let k2 = corpus::k2::<Rational>(6);
    let q = direct_sum(&k2, &corpus::trivial_for(&k2)).unwrap();
    println!("input:\n{}", format::print_qp(&q));

    let s = split(&q).unwrap();
    println!("trivial pairs: {:?}", s.trivial_pair_names(q.quiver()));
    println!("reduced part:\n{}", format::print_qp(&s.reduced));

    let image = apply_equiv(&s.witness, &q).unwrap();
    let rest = image.potential().sub(&s.trivial_potential).unwrap();
    println!("φ(W) - Σab = {}", rest.display(q.quiver()));
    println!("W_red      = {}", s.reduced.potential().display(s.reduced.quiver()));
}
