//! Discrete derivatives and prolongation coefficients approaching their
//! continuous counterparts as the spacing shrinks.

use dslie::cli::{probe_discrete_derivative, probe_first_prolongation, Curve};
use dslie::expr::{int, parse, rat, Rational};
use dslie::prolong::MultiPointVectorField;
use dslie::stencil::{Convergence, Stencil};

fn report(name: &str, c: &Convergence) {
    let errors: Vec<String> = c.errors.iter().map(|e| format!("{:.3e}", e)).collect();
    match c.order {
        _ if c.exact => println!("{:32} exact", name),
        Some(o) => println!("{:32} order {:.3}  errors {}", name, o, errors.join(" ")),
        None => println!("{:32} -", name),
    }
}

fn main() -> dslie::Result<()> {
    let h = [0.1, 0.05, 0.025, 0.0125];
    for k in 1..=3 {
        report(&format!("p^({}) on e^x", k), &probe_discrete_derivative(&Curve::Exp, k, 0.0, &h)?);
    }
    report("p^(2) on sin x at 1", &probe_discrete_derivative(&Curve::Sin, 2, 1.0, &h)?);
    // polynomial exactness, in exact rational arithmetic
    for k in 1..=4usize {
        let y = |x: &Rational| x.pow(k as i32) * int(3) - x.pow(k as i32 - 1) + int(2);
        let points = (0..=k as i64).map(|j| (rat(1, 2) + rat(j, 10), y(&(rat(1, 2) + rat(j, 10))))).collect();
        let d = Stencil::new(points)?.derivative_table()?;
        let value = d[k][k].clone().expect("table entry exists");
        println!("{:32} {} (k! * 3 = {})", format!("p^({}) on 3x^{} - x^{} + 2", k, k, k - 1), value, 3 * (1..=k).product::<usize>());
    }
    for (xi, phi) in [("x[n]", "y[n]"), ("x[n]^2", "x[n]*y[n]"), ("y[n]", "0")] {
        let f = MultiPointVectorField::point(parse(xi)?, parse(phi)?)?;
        report(&format!("phi^(1) of ({}, {}) on e^x", xi, phi), &probe_first_prolongation(&f, &Curve::Exp, 0.0, &h)?);
    }
    Ok(())
}
