//! The expression kernel: parsing, canonical forms, differentiation with
//! unknown functions, and the probabilistic zero test.

use dslie::expr::{parse, Expr, UnknownFn, Var, ZeroTest};

fn main() -> dslie::Result<()> {
    let slope = parse("(y[n+1] - y[n])/(x[n+1] - x[n])")?;
    println!("slope          = {}", slope);
    println!("d/dy[n+1]      = {}", slope.diff(&Var::indexed("y", 1)));
    println!("shifted by one = {}", slope.shift(1));

    let f = UnknownFn::new("f", 2);
    let g = f.call(vec![parse("x^2")?, parse("x*y")?])?;
    println!("d/dx f(x^2, x*y) = {}", g.diff(&Var::plain("x")));

    // (a - b)(a + b) and a^2 - b^2 are different trees with the same value
    let lhs = parse("(a - b)*(a + b)")?;
    let rhs = parse("a^2 - b^2")?;
    let zt = ZeroTest::default();
    println!("{} == {}: structural {}, probabilistic {}", lhs, rhs, lhs == rhs, zt.equal(&lhs, &rhs)?);

    let partial = parse("D[1,2](f)(x, y)")?;
    let mixed: Expr = g.diff(&Var::plain("y"));
    println!("d/dy f(x^2, x*y) = {}   (contains {})", mixed, partial.functions().len());
    Ok(())
}
