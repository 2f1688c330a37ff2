//! The continuous picture: contact fields generated by a characteristic have
//! prolongations free of second derivatives; point fields are the special case.

use dslie::continuous::{check_contact_condition, check_symmetry_ode, contact_from_characteristic, prolong_continuous, ContinuousField, JetVariables};
use dslie::expr::{parse, ZeroTest};

fn main() -> dslie::Result<()> {
    let zt = ZeroTest::default();
    for w in ["y1^2/2", "x*y1 - y", "y1^3 + x*y*y1"] {
        let f = contact_from_characteristic(&parse(w)?)?;
        let phi1 = prolong_continuous(&f, 1).remove(0);
        let free_of_y2 = zt.is_zero(&phi1.diff(&JetVariables::y(2)))?;
        println!(
            "W = {:14} xi = {:10} phi = {:22} contact {}, phi^(1) free of y2 {}",
            w, f.xi.to_string(), f.phi.to_string(), check_contact_condition(&f)?, free_of_y2
        );
    }
    let not_contact = ContinuousField::new(parse("0")?, parse("y1^2")?, 1)?;
    println!("xi = 0, phi = y1^2: contact {}", check_contact_condition(&not_contact)?);

    // y'' = 0 and its eight point symmetries
    let rhs = parse("0")?;
    for (xi, phi) in [("1", "0"), ("0", "1"), ("x", "0"), ("0", "y"), ("0", "x"), ("y", "0"), ("x^2", "x*y"), ("x*y", "y^2")] {
        let f = ContinuousField::point(parse(xi)?, parse(phi)?)?;
        println!("({}, {}) residual {}", xi, phi, check_symmetry_ode(&f, &rhs, 2)?);
    }
    Ok(())
}
