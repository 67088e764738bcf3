//! Parse a QP from text, report diagnostics for a broken file, and export it
//! as JSON and DOT.

use qpcalc::field::Rational;
use qpcalc::format;

fn main() {
    let text = "\
# the oriented 3-cycle
vertices 1 2 3
arrow a 1 2
arrow b 2 3
arrow c 3 1
potential 1 c.b.a
truncation 6
";
    let q = format::parse_qp::<Rational>(text).expect("valid QP");
    println!("{q}\n");
    println!("{}", format::to_json(&q));
    println!("{}", format::qp_to_dot(&q));

    let broken = "vertices 1 2\narrow a 1 2\npotential 1 a.b\n";
    match format::parse_qp::<Rational>(broken) {
        Ok(_) => unreachable!(),
        Err(e) => {
            for d in &e.diagnostics {
                println!("diagnostic: {d}");
            }
        }
    }
}
