//! Build the Ginzburg dg algebra of a QP, print its differential and the
//! homology of its truncations.

use qpcalc::corpus;
use qpcalc::field::Rational;
use qpcalc::ginzburg::{truncation_homology, GinzburgAlgebra};

fn main() {
    let q = corpus::c3::<Rational>(6);
    let g = GinzburgAlgebra::new(&q).unwrap();
    let gq = g.quiver();
    for a in gq.arrow_ids() {
        println!("d({}) = {}", gq.arrow(a).name, g.differential(a).display(gq));
    }
    println!("d² = 0: {}", g.check_d_squared());
    let table = truncation_homology(&g, &[1, 2, 3, 4, 5, 6], &[-4, -3, -2, -1, 0]).unwrap();
    println!("{}", table.to_text());
}
