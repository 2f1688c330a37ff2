//! Closure analysis of a fully general two-point field: every closure
//! condition forces a partial derivative of xi or phi to vanish, and together
//! they leave a point transformation.

use dslie::contact::{classify, Outcome};
use dslie::prolong::MultiPointVectorField;

fn main() -> dslie::Result<()> {
    for order in 1..=2 {
        let f = MultiPointVectorField::symbolic(order);
        let c = classify(&f, order)?;
        let cc = c.conditions.as_ref().expect("symbolic analysis records conditions");
        println!("order {}: {} closure conditions", order, cc.conditions.len());
        for cond in &cc.conditions {
            if let Outcome::Forces { prefactor, core } = &cond.outcome {
                println!("  d {} / d {}: ({}) * {}", cond.coefficient, cond.variable, prefactor, core);
            }
        }
        for k in &cc.constraints {
            println!("  => {}", k.text);
        }
        println!("  verdict: {}", c.verdict);
    }
    Ok(())
}
