//! Discrete prolongation of point and two-point fields in stencil coordinates.

use dslie::expr::parse;
use dslie::prolong::{prolong_discrete, prolongation_footprint, MultiPointVectorField};

fn show(name: &str, f: &MultiPointVectorField, levels: usize) -> dslie::Result<()> {
    let r = prolong_discrete(f, levels)?;
    println!("{} (chart of {} points)", name, r.chart_points);
    for l in &r.levels {
        let fp = prolongation_footprint(&r, l.k)?;
        println!("  kappa^({}) = {}", l.k, l.kappa_chart);
        println!("  phi^({})   = {}", l.k, l.phi_chart);
        let vars: Vec<String> = fp.phi.iter().map(|v| v.to_string()).collect();
        println!("  phi^({}) depends on {}", l.k, vars.join(", "));
    }
    Ok(())
}

fn main() -> dslie::Result<()> {
    let dilation = MultiPointVectorField::point(parse("x[n]")?, parse("y[n]")?)?;
    show("dilation", &dilation, 2)?;
    let projective = MultiPointVectorField::point(parse("x[n]^2")?, parse("x[n]*y[n]")?)?;
    show("projective", &projective, 1)?;
    let slope = MultiPointVectorField::new(1, parse("0")?, parse("(y[n+1]-y[n])/(x[n+1]-x[n])")?)?;
    show("slope field", &slope, 1)?;
    Ok(())
}
