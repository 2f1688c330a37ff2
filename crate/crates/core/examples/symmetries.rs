//! Point symmetries of the discrete free particle: invariance residuals on the
//! solution manifold, splitting of a failing residual, and flow transport of a
//! solution.

use dslie::continuous::{integrate_flow, ContinuousField};
use dslie::expr::parse;
use dslie::prolong::MultiPointVectorField;
use dslie::scheme::{invariance_residual, split_determining, trajectory, ManifoldResidual, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dslie::Result<()> {
    let s = Scheme::new(
        "free particle",
        parse("y[n+2] - 2*y[n+1] + y[n]")?,
        parse("x[n+2] - 2*x[n+1] + x[n]")?,
        Some(parse("y2")?),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let candidates = [
        ("1", "0"),
        ("0", "1"),
        ("x[n]", "0"),
        ("0", "y[n]"),
        ("0", "x[n]"),
        ("y[n]", "0"),
        ("0", "y[n]^2"),
    ];
    for (xi, phi) in candidates {
        let f = MultiPointVectorField::point(parse(xi)?, parse(phi)?)?;
        let r = invariance_residual(&f, &s, &mut rng)?;
        let ManifoldResidual::Symbolic { residuals } = r else { unreachable!("the scheme is affine") };
        println!("xi = {:5} phi = {:7} residuals [{}, {}]", xi, phi, residuals[0], residuals[1]);
        if !residuals[0].is_zero() {
            for eq in split_determining(&residuals[0], &s)? {
                println!("    determining equation: {} = 0", eq);
            }
        }
    }

    let t = trajectory(&s, &[(0.0, 1.0), (0.5, 2.0)], 8)?;
    let lambda = 1e-3;
    let shear = ContinuousField::point(parse("y")?, parse("0")?)?;
    let mut moved = t.clone();
    for p in moved.points.iter_mut() {
        *p = integrate_flow(&shear, *p, lambda, 10)?;
    }
    println!(
        "trajectory residual {:e}, after the shear flow {:e}",
        t.max_residual(&s)?,
        moved.max_residual(&s)?
    );
    Ok(())
}
