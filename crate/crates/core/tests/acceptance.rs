//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::path::PathBuf;

use dslie::cli::{probe_discrete_derivative, probe_first_prolongation, Curve};
use dslie::contact::{classify_evolutionary, numeric_sensitivity, Coefficient, Sampling, Verdict};
use dslie::continuous::{integrate_flow, ContinuousField};
use dslie::expr::{int, parse, rat, Expr, Rational, Var, ZeroTest};
use dslie::prolong::{prolong_discrete, MultiPointVectorField};
use dslie::scheme::{invariance_residual, trajectory, ManifoldResidual, Scheme};
use dslie::stencil::{symbolic_chart_substitution, Stencil};
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn data(name: &str) -> String {
    let mut d = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    d.push("data");
    d.push(name);
    d.display().to_string()
}

fn free_particle() -> Scheme {
    Scheme::new(
        "free particle",
        p("y[n+2] - 2*y[n+1] + y[n]"),
        p("x[n+2] - 2*x[n+1] + x[n]"),
        Some(p("y2")),
    )
    .unwrap()
}

/// Closure replay for a general two-point field through the command line.
fn no_go_symbolic() -> Outcome {
    let args = ["dslie", "contact-analyze", &data("symbolic1.field"), "--symbolic", "--order", "1", "--json"];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dslie::cli::run(args, &mut out, &mut err);
    check(code == 0, format!("exit {}: {}", code, String::from_utf8_lossy(&err)))?;
    let doc: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let zt = ZeroTest::default();
    let chart = symbolic_chart_substitution(3);
    let at_next = "(x[n+1], y[n+1], x[n+2], y[n+2])";
    let refs = [
        ("kappa", format!("h[n+2]*(h[n+1] + h[n+2])/2 * D[4](xi){}", at_next)),
        (
            "phi",
            format!(
                "h[n+2]*(h[n+1] + h[n+2])/(2*h[n+1]) * (D[4](phi){a} - p1[n+1]*D[4](xi){a})",
                a = at_next
            ),
        ),
    ];
    let conds = doc["conditions"]["conditions"].as_array().ok_or("no conditions")?;
    check(conds.len() == 4, format!("{} conditions", conds.len()))?;
    for (i, (coef, r)) in refs.iter().enumerate() {
        let c = &conds[i];
        check(c["variable"] == "p2[n+2]", format!("condition {} is not d/dp2[n+2]", i + 1))?;
        check(c["coefficient"] == format!("{}^(1)", coef).as_str(), "wrong coefficient")?;
        let raw = parse(c["raw"].as_str().ok_or("raw")?).map_err(|e| e.to_string())?;
        let reference = p(r).substitute(&chart);
        check(zt.equal(&raw, &reference).map_err(|e| e.to_string())?, format!("condition {} differs from reference", i + 1))?;
    }
    // the phi condition with prefactor h2*(h1 + h2)/h1 differs by the constant 2
    let raw_phi = parse(conds[1]["raw"].as_str().unwrap()).unwrap();
    let doubled = p(&format!(
        "h[n+2]*(h[n+1] + h[n+2])/h[n+1] * (D[4](phi){a} - p1[n+1]*D[4](xi){a})",
        a = at_next
    ))
    .substitute(&chart);
    check(zt.equal(&(raw_phi * Expr::integer(2)), &doubled).unwrap(), "phi prefactor")?;
    let statements: Vec<Expr> = doc["conditions"]["constraints"]
        .as_array()
        .ok_or("no constraints")?
        .iter()
        .map(|c| parse(c["statement"].as_str().unwrap()).unwrap())
        .collect();
    let at = "(x[n], y[n], x[n+1], y[n+1])";
    let expected: Vec<Expr> = ["D[4](xi)", "D[4](phi)", "D[3](xi)", "D[3](phi)"]
        .iter()
        .map(|d| p(&format!("{}{}", d, at)))
        .collect();
    check(statements == expected, format!("constraint chain {:?}", statements))?;
    check(doc["verdict"] == "point", format!("verdict {}", doc["verdict"]))?;
    Ok("dkappa/dp2, dphi/dp2 match the closed forms; chain xi_y, phi_y, xi_x, phi_x at (n, n+1); verdict Point".into())
}

fn no_go_numeric() -> Outcome {
    let opts = Sampling::default();
    let mut r = common::rng(101);
    let mut weakest = f64::INFINITY;
    for i in 0..100 {
        let f = common::random_two_point_field(&mut r);
        let s = numeric_sensitivity(&f, 1, &Sampling { seed: 1000 + i, ..opts.clone() }).map_err(|e| e.to_string())?;
        let m = s.max_for(Coefficient::Kappa(1)).max(s.max_for(Coefficient::Phi(1)));
        weakest = weakest.min(m);
        check(m >= 1e-3, format!("field {} ({}, {}) max sensitivity {:e}", i, f.xi, f.phi, m))?;
    }
    let mut strongest = 0.0f64;
    for i in 0..100 {
        let f = common::random_point_field(&mut r);
        let s = numeric_sensitivity(&f, 1, &Sampling { seed: 2000 + i, ..opts.clone() }).map_err(|e| e.to_string())?;
        strongest = strongest.max(s.max());
        check(s.max() <= 1e-8, format!("point field {} sensitivity {:e}", i, s.max()))?;
    }
    Ok(format!(
        "two-point fields: min of max sensitivity {:.3e}; point fields: max {:e}",
        weakest, strongest
    ))
}

fn order_one_formula() -> Outcome {
    let mut r = common::rng(303);
    let zt = ZeroTest::default();
    let chart = symbolic_chart_substitution(2);
    for i in 0..50 {
        let f = common::random_point_field(&mut r);
        let res = prolong_discrete(&f, 1).map_err(|e| e.to_string())?;
        let h = p("x[n+1] - x[n]");
        let slope = p("(y[n+1] - y[n])/(x[n+1] - x[n])");
        let reference = (f.phi_at(1) - &f.phi) / &h - slope * (f.xi_at(1) - &f.xi) / &h;
        let level = &res.levels[0];
        check(level.phi == reference, format!("field {}: {} != {}", i, level.phi, reference))?;
        check(
            zt.equal(&level.phi_chart, &reference.substitute(&chart)).unwrap(),
            format!("field {}: chart form differs", i),
        )?;
    }
    Ok("50 random polynomial point fields: structural equality in point coordinates".into())
}

fn continuous_limit() -> Outcome {
    let h = [0.1, 0.05, 0.025, 0.0125];
    let mut notes = Vec::new();
    let fields = [("x[n]", "y[n]"), ("y[n]", "0"), ("x[n]^2", "x[n]*y[n] + y[n]^2")];
    for (xi, phi) in fields {
        let f = MultiPointVectorField::point(p(xi), p(phi)).unwrap();
        let c = probe_first_prolongation(&f, &Curve::Exp, 0.0, &h).map_err(|e| e.to_string())?;
        check(c.at_least(0.9), format!("phi^(1) of ({}, {}): {:?}", xi, phi, c))?;
        notes.push(match c.order {
            _ if c.exact => format!("({}, {}) exact", xi, phi),
            Some(o) => format!("({}, {}) {:.3}", xi, phi, o),
            None => unreachable!(),
        });
    }
    let p2 = probe_discrete_derivative(&Curve::Exp, 2, 0.0, &h).map_err(|e| e.to_string())?;
    check(p2.at_least(0.9) && !p2.exact, format!("p^(2): {:?}", p2))?;
    notes.push(format!("p^(2) {:.3}", p2.order.unwrap()));
    let mut r = common::rng(404);
    for k in 1..=4usize {
        let coeffs: Vec<Rational> = (0..=k).map(|_| rat(r.gen_range(-9..=9), r.gen_range(1..=4))).collect();
        let lead = if coeffs[k] == int(0) { int(1) } else { coeffs[k].clone() };
        let poly = |x: &Rational| {
            let mut acc = lead.clone();
            for c in coeffs[..k].iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        let fact: i64 = (1..=k as i64).product();
        let target = lead.clone() * int(fact);
        for _ in 0..5 {
            let s = common::random_rational_stencil(&mut r, k + 1);
            let s = Stencil::new(s.points.iter().map(|(x, _)| (x.clone(), poly(x))).collect()).unwrap();
            let d = s.derivative_table().map_err(|e| e.to_string())?;
            check(d[k][k].as_ref() == Some(&target), format!("rational p^({}) not exact", k))?;
        }
        let lead_f = num_traits::ToPrimitive::to_f64(&lead).unwrap();
        let coeffs_f: Vec<f64> = coeffs.iter().map(|c| num_traits::ToPrimitive::to_f64(c).unwrap()).collect();
        let poly_f = |x: f64| coeffs_f[..k].iter().rev().fold(lead_f, |acc, c| acc * x + c);
        let target_f = lead_f * fact as f64;
        let s = Stencil { points: (0..=k).map(|j| (0.3 + 0.1 * j as f64, poly_f(0.3 + 0.1 * j as f64))).collect() };
        let v = s.derivative_table().unwrap()[k][k].unwrap();
        check(
            (v - target_f).abs() <= 1e-12 * target_f.abs().max(1.0),
            format!("f64 p^({}) = {} vs {}", k, v, target_f),
        )?;
    }
    notes.push("p^(k) exact on degree-k polynomials, k <= 4".into());
    Ok(notes.join("; "))
}

fn symmetry_verification() -> Outcome {
    let s = free_particle();
    let mut r = common::rng(505);
    let zt = ZeroTest::default();
    let six = [("1", "0"), ("0", "1"), ("x[n]", "0"), ("0", "y[n]"), ("0", "x[n]"), ("y[n]", "0")];
    for (xi, phi) in six {
        let f = MultiPointVectorField::point(p(xi), p(phi)).unwrap();
        let res = invariance_residual(&f, &s, &mut r).map_err(|e| e.to_string())?;
        let ManifoldResidual::Symbolic { residuals } = &res else {
            return Err("free particle residuals should be symbolic".into());
        };
        check(residuals.iter().all(|e| e.is_zero()), format!("({}, {}) residuals {:?}", xi, phi, residuals))?;
    }
    let quad = MultiPointVectorField::point(p("0"), p("y[n]^2")).unwrap();
    let res = invariance_residual(&quad, &s, &mut r).map_err(|e| e.to_string())?;
    check(!res.vanishes(&zt, 1e-8).unwrap(), "y^2 d/dy reported as a symmetry")?;

    let lambda = 1e-3;
    let mut worst = 0.0f64;
    for (xi, phi) in six {
        let to_jet = |e: &str| p(&e.replace("x[n]", "x").replace("y[n]", "y"));
        let g = ContinuousField::point(to_jet(xi), to_jet(phi)).unwrap();
        for _ in 0..5 {
            let x0 = r.gen_range(-1.0..1.0);
            let init = [(x0, r.gen_range(-1.0..1.0)), (x0 + r.gen_range(0.1..1.0), r.gen_range(-1.0..1.0))];
            let mut t = trajectory(&s, &init, 10).map_err(|e| e.to_string())?;
            for q in t.points.iter_mut() {
                *q = integrate_flow(&g, *q, lambda, 10).map_err(|e| e.to_string())?;
            }
            worst = worst.max(t.max_residual(&s).unwrap());
        }
    }
    check(worst <= 1e-6 * lambda, format!("transported residual {:e}", worst))?;
    Ok(format!("six generators give zero residuals, y^2 d/dy does not; transported residual {:e}", worst))
}

fn evolutionary() -> Outcome {
    let mut r = common::rng(606);
    let (y0, y1) = (Var::indexed("y", 0), Var::indexed("y", 1));
    let zt = ZeroTest::default();
    for i in 0..100 {
        let h = rat(r.gen_range(1..=9), r.gen_range(1..=4));
        let phi = loop {
            let e = common::random_poly(&mut r, &[y0.clone(), y1.clone()], 3);
            if !zt.is_zero(&e.diff(&y1)).unwrap() {
                break e;
            }
        };
        let f = MultiPointVectorField::new(1, Expr::zero(), phi.clone()).unwrap();
        let c = classify_evolutionary(&f, 1, h).map_err(|e| e.to_string())?;
        check(c.verdict == Verdict::NonClosing, format!("case {}: phi = {} gave {}", i, phi, c.verdict))?;
    }
    for i in 0..100 {
        let h = rat(r.gen_range(1..=9), r.gen_range(1..=4));
        let phi = common::random_poly(&mut r, &[y0.clone()], 3);
        let f = MultiPointVectorField::new(1, Expr::zero(), phi.clone()).unwrap();
        let c = classify_evolutionary(&f, 1, h).map_err(|e| e.to_string())?;
        check(c.verdict == Verdict::Point, format!("case {}: phi = {} gave {}", i, phi, c.verdict))?;
    }
    Ok("100 + 100 cases, no misclassification".into())
}

fn round_trips() -> Outcome {
    let mut r = common::rng(707);
    for i in 0..500 {
        let k = r.gen_range(2..=6);
        let s = common::random_rational_stencil(&mut r, k);
        let c = s.to_chart().map_err(|e| e.to_string())?;
        let back = c.from_chart().map_err(|e| e.to_string())?;
        check(back == s, format!("stencil {} does not round-trip", i))?;
        check(back.to_chart().unwrap() == c, format!("chart {} does not round-trip", i))?;
    }
    for i in 0..1000 {
        let e = common::random_expr(&mut r, 4);
        let text = e.to_string();
        let back = parse(&text).map_err(|err| format!("expression {} `{}`: {}", i, text, err))?;
        check(back == e, format!("expression {}: `{}` re-parses as `{}`", i, text, back))?;
    }
    let s = free_particle();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (a, b) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let t = trajectory(&s, &[(0.0, a), (1.0, b)], 20).map_err(|e| e.to_string())?;
        for (j, (x, y)) in t.points.iter().enumerate() {
            let j = j as f64;
            worst = worst.max((x - j).abs()).max((y - (a + (b - a) * j)).abs());
        }
    }
    check(worst <= 1e-12, format!("Newton trajectory error {:e}", worst))?;
    Ok(format!("500 charts, 1000 expressions, Newton error {:e}", worst))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("no-go symbolic replay, order 1", no_go_symbolic),
        ("no-go numeric oracle", no_go_numeric),
        ("order-1 prolongation formula", order_one_formula),
        ("continuous limit", continuous_limit),
        ("symmetry verification", symmetry_verification),
        ("evolutionary case", evolutionary),
        ("round trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {} ({:.2}s): {}", i + 1, name, secs, detail),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {} ({:.2}s): {}", i + 1, name, secs, why);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
