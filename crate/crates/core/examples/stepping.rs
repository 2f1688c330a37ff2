//! Solving schemes forward with Newton's method.

use dslie::expr::parse;
use dslie::scheme::{step_scheme, trajectory, Scheme};

fn main() -> dslie::Result<()> {
    let free = Scheme::new(
        "free particle",
        parse("y[n+2] - 2*y[n+1] + y[n]")?,
        parse("x[n+2] - 2*x[n+1] + x[n]")?,
        None,
    )?;
    let t = trajectory(&free, &[(0.0, 3.0), (0.25, 2.0)], 6)?;
    for (j, (x, y)) in t.points.iter().enumerate() {
        println!("{:2} {:8.4} {:8.4}", j, x, y);
    }

    // an implicit nonlinear scheme: y' = y^2 on an adaptive lattice
    let riccati = Scheme::new(
        "riccati",
        parse("(y[n+1] - y[n])/(x[n+1] - x[n]) - y[n]*y[n+1]")?,
        parse("x[n+1] - x[n] - 1/(10*(1 + y[n]^2))")?,
        None,
    )?;
    let mut p = (0.0, 0.5);
    for _ in 0..5 {
        p = step_scheme(&riccati, &[p])?;
        println!("x = {:.6}, y = {:.6}, exact 1/(2 - x) = {:.6}", p.0, p.1, 1.0 / (2.0 - p.0));
    }

    let singular = Scheme::new("singular", parse("x[n+1] + y[n+1] - y[n]")?, parse("2*x[n+1] + 2*y[n+1] - x[n]")?, None)?;
    println!("singular scheme: {}", step_scheme(&singular, &[(0.0, 1.0)]).unwrap_err());
    Ok(())
}
