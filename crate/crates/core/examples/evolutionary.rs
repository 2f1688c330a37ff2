//! Evolutionary fields `phi_n d/dy_n` on a fixed uniform lattice.

use dslie::contact::classify_evolutionary;
use dslie::expr::{int, parse, Expr, UnknownFn};
use dslie::prolong::MultiPointVectorField;

fn main() -> dslie::Result<()> {
    let general = UnknownFn::new("phi", 2).call(vec![parse("y[n]")?, parse("y[n+1]")?])?;
    let fields = [
        ("phi(y[n], y[n+1])", general),
        ("y[n]^2", parse("y[n]^2")?),
        ("y[n+1]", parse("y[n+1]")?),
        ("y[n+1] - y[n]", parse("y[n+1] - y[n]")?),
    ];
    for (name, phi) in fields {
        let f = MultiPointVectorField::new(1, Expr::zero(), phi)?;
        let c = classify_evolutionary(&f, 1, int(1))?;
        print!("phi_n = {}: {}", name, c.verdict);
        if let Some(w) = &c.witness {
            print!(" ({} depends on {})", w.coefficient, w.variable);
        }
        println!();
    }
    Ok(())
}
