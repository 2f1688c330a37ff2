//! Random generators shared by the integration tests.
#![allow(dead_code)]

use dslie::expr::{int, rat, Expr, Rational, UnknownFn, Var};
use dslie::prolong::MultiPointVectorField;
use dslie::stencil::Stencil;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn leaf(r: &mut ChaCha8Rng) -> Expr {
    match r.gen_range(0..9) {
        0 => Expr::integer(r.gen_range(-5..=5)),
        1 => Expr::constant(rat(r.gen_range(-7..=7), r.gen_range(1..=5))),
        2 => Expr::sym("x"),
        3 => Expr::sym("y"),
        4 => Expr::sym("a"),
        5 => Expr::idx("x", r.gen_range(-1..=2)),
        6 => Expr::idx("y", r.gen_range(0..=2)),
        7 => Expr::idx("h", 1),
        _ => Expr::var(Var::indexed("p2", 2)),
    }
}

fn nonzero(e: Expr) -> Expr {
    if e.is_zero() {
        Expr::one()
    } else {
        e
    }
}

/// Random expression over plain, indexed and function-application nodes.
pub fn random_expr(r: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || r.gen_bool(0.25) {
        return leaf(r);
    }
    let d = depth - 1;
    match r.gen_range(0..9) {
        0 | 1 => random_expr(r, d) + random_expr(r, d),
        2 => random_expr(r, d) - random_expr(r, d),
        3 | 4 => random_expr(r, d) * random_expr(r, d),
        5 => random_expr(r, d) / nonzero(random_expr(r, d)),
        6 => {
            let k: Rational = match r.gen_range(0..4) {
                0 => int(2),
                1 => int(3),
                2 => int(-1),
                _ => rat(1, 2),
            };
            Expr::pow(nonzero(random_expr(r, d)), k)
        }
        7 => -random_expr(r, d),
        _ => {
            let f = UnknownFn::new(if r.gen_bool(0.5) { "f" } else { "g" }, 2);
            let args = vec![random_expr(r, d), random_expr(r, d)];
            if r.gen_bool(0.5) {
                f.call(args).unwrap()
            } else {
                let slots: Vec<usize> = (0..r.gen_range(1..=2)).map(|_| r.gen_range(0..2)).collect();
                f.partial(&slots, args).unwrap()
            }
        }
    }
}

/// Random polynomial with small integer coefficients in the given variables
/// (total degree at most 2).
pub fn random_poly(r: &mut ChaCha8Rng, vars: &[Var], terms: usize) -> Expr {
    let mut out = Vec::new();
    for _ in 0..terms {
        let mut m = vec![Expr::integer(r.gen_range(1..=4) * if r.gen_bool(0.5) { 1 } else { -1 })];
        let deg = r.gen_range(0..=2);
        for _ in 0..deg {
            m.push(Expr::var(vars[r.gen_range(0..vars.len())].clone()));
        }
        out.push(Expr::mul(m));
    }
    Expr::add(out)
}

pub fn point_vars() -> Vec<Var> {
    vec![Var::indexed("x", 0), Var::indexed("y", 0)]
}

pub fn two_point_vars() -> Vec<Var> {
    vec![Var::indexed("x", 0), Var::indexed("y", 0), Var::indexed("x", 1), Var::indexed("y", 1)]
}

pub fn random_point_field(r: &mut ChaCha8Rng) -> MultiPointVectorField {
    let v = point_vars();
    let xi = random_poly(r, &v, 3);
    let phi = random_poly(r, &v, 3);
    MultiPointVectorField::point(xi, phi).unwrap()
}

/// Two-point polynomial field whose coefficients genuinely involve `x[n+1]` or `y[n+1]`.
pub fn random_two_point_field(r: &mut ChaCha8Rng) -> MultiPointVectorField {
    let v = two_point_vars();
    loop {
        let xi = random_poly(r, &v, 3);
        let phi = random_poly(r, &v, 3);
        let involves = [&xi, &phi].iter().any(|e| {
            v[2..].iter().any(|w| !e.diff(w).is_zero())
        });
        if involves {
            return MultiPointVectorField::new(1, xi, phi).unwrap();
        }
    }
}

/// Rational stencil with strictly increasing abscissae.
pub fn random_rational_stencil(r: &mut ChaCha8Rng, points: usize) -> Stencil<Rational> {
    let mut x = rat(r.gen_range(-20..=20), r.gen_range(1..=6));
    let mut pts = Vec::with_capacity(points);
    for _ in 0..points {
        pts.push((x.clone(), rat(r.gen_range(-30..=30), r.gen_range(1..=7))));
        x += rat(r.gen_range(1..=9), r.gen_range(1..=4));
    }
    Stencil::new(pts).unwrap()
}
