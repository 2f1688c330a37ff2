//! Sampling oracle: finite-difference sensitivities of the prolongation
//! coefficients to the points beyond the field's support, up to order 4.

use dslie::contact::{classify_numeric, numeric_sensitivity, Sampling};
use dslie::expr::parse;
use dslie::prolong::MultiPointVectorField;

fn main() -> dslie::Result<()> {
    let opts = Sampling { samples: 50, ..Sampling::default() };
    let point = MultiPointVectorField::point(parse("x[n]*y[n]")?, parse("y[n]^2 - x[n]")?)?;
    for l in 1..=4 {
        let s = numeric_sensitivity(&point, l, &opts)?;
        println!("point field, order {}: max sensitivity {:e}", l, s.max());
    }
    let candidates = [
        (1, "x[n+1]", "y[n]"),
        (2, "0", "y[n+2]*x[n]"),
        (3, "y[n+3] - y[n]", "0"),
    ];
    for (order, xi, phi) in candidates {
        let f = MultiPointVectorField::new(order, parse(xi)?, parse(phi)?)?;
        let c = classify_numeric(&f, order, &opts, 1e-6)?;
        let w = c.witness.expect("non-closing fields have a witness");
        println!(
            "xi = {}, phi = {}: {} ({} depends on {}, {:.3e})",
            xi, phi, c.verdict, w.coefficient, w.variable, w.sensitivity.unwrap_or(0.0)
        );
    }
    Ok(())
}
