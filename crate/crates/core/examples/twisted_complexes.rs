//! Twisted complexes over a Ginzburg algebra: the resolution of a simple, a
//! mapping cone, and their homology.

use std::sync::Arc;

use qpcalc::corpus;
use qpcalc::dgmod::{cofibrant_simple, hom_dims_to_simple, Matrix, TwistedComplex};
use qpcalc::field::Rational;
use qpcalc::ginzburg::GinzburgAlgebra;
use qpcalc::ncseries::Series;

fn main() {
    let q = corpus::c3::<Rational>(6);
    let g = Arc::new(GinzburgAlgebra::new(&q).unwrap());
    let one = q.vertex("1").unwrap();

    let s = cofibrant_simple(&g, one).unwrap();
    println!("resolution of S1: {}", serde_json::to_string_pretty(&s.to_json()).unwrap());
    println!("Maurer–Cartan: {}", s.is_maurer_cartan());
    println!("homology: {:?}", s.homology(6).unwrap().support());
    for j in q.quiver().vertices() {
        println!("dim Hom(P, Σ^m S{}) by m: {:?}", q.quiver().vertex_name(j), hom_dims_to_simple(&s, j));
    }

    let p = TwistedComplex::projective(g.clone(), one);
    let mut id = Matrix::zero(1, 1, 6);
    id.add_entry(0, 0, &Series::lazy(one, 6));
    let cone = TwistedComplex::cone(&p, &p, &id).unwrap();
    println!("cone of the identity is acyclic: {}", cone.homology(6).unwrap().total() == 0);
}
