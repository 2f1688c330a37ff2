//! Command-line front end.
//!
//! Exit codes: 0 success, 1 some candidate is not a symmetry, 2 parse or usage
//! error, 3 invariant or independence failure, 4 unsupported order,
//! 5 divergence. Reports go to stdout, diagnostics to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::contact::{self, Classification, Lattice, Outcome, Sampling};
use crate::continuous::{prolong_continuous, ContinuousField, JetVariables};
use crate::error::{Error, Result};
use crate::expr::eval::eval_f64;
use crate::expr::{parse, Expr, Var, ZeroTest};
use crate::files::{load_definition, load_field, load_scheme, Definition};
use crate::prolong::{phi_levels, prolong_discrete, prolongation_footprint, MultiPointVectorField};
use crate::scheme::{check_independence, invariance_residual, random_window, trajectory_with, ManifoldResidual, Newton, NUMERIC_TOLERANCE};
use crate::stencil::{continuous_limit_probe, x_var, y_var, Convergence, Stencil};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SYMMETRY: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;
pub const EXIT_DIVERGENCE: i32 = 5;

/// Default seed for every randomized operation.
pub const DEFAULT_SEED: u64 = crate::expr::zero::DEFAULT_SEED;

/// Minimum observed order accepted by `limit-check`.
pub const MIN_ORDER: f64 = 0.9;

/// Default threshold on sampled sensitivities for `contact-analyze --numeric`.
pub const SENSITIVITY_THRESHOLD: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "dslie", version, about = "Lie symmetry analysis of ordinary difference schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every randomized operation.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Numeric tolerance (meaning depends on the subcommand).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discrete prolongation coefficients of a field and their footprints.
    Prolong {
        /// Field definition file.
        field: PathBuf,
        /// Highest prolongation level.
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Show coefficients in stencil-chart coordinates (default).
        #[arg(long, conflicts_with = "points")]
        chart: bool,
        /// Show coefficients in point coordinates.
        #[arg(long)]
        points: bool,
    },
    /// Verify the candidate fields of a scheme file.
    CheckSymmetry {
        /// Scheme definition file.
        scheme: PathBuf,
    },
    /// Closure analysis of a multi-point field.
    ContactAnalyze {
        /// Field definition file.
        field: PathBuf,
        /// Prolongation order analysed.
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Derive closure conditions symbolically (default).
        #[arg(long, conflicts_with = "numeric")]
        symbolic: bool,
        /// Estimate sensitivities by finite differences.
        #[arg(long)]
        numeric: bool,
        /// Random charts sampled in numeric mode.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Convergence of discrete quantities to their continuous limits.
    LimitCheck {
        /// Field or scheme definition file.
        file: PathBuf,
        /// Strictly decreasing spacings, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        h_sequence: Vec<f64>,
        /// `exp`, `sin`, or an expression in `x`.
        #[arg(long, default_value = "exp")]
        curve: String,
        /// Base abscissa of the stencils.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        at: f64,
        /// Highest discrete derivative probed (default: 2, or K-1 for schemes).
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Iterate a scheme from initial points.
    Step {
        /// Scheme definition file.
        scheme: PathBuf,
        /// Initial points `x,y;x,y;...` (K-1 of them).
        #[arg(long, allow_hyphen_values = true)]
        initial: String,
        /// Number of new points computed.
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::Arity { .. } | Error::File { .. } | Error::Probe(_) => EXIT_PARSE,
        Error::UnsupportedOrder { .. } => EXIT_UNSUPPORTED,
        Error::NewtonDivergence { .. } | Error::NonFinite => EXIT_DIVERGENCE,
        _ => EXIT_INVARIANT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", shown);
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", shown);
                    EXIT_PARSE
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = out.write_all(report.text.as_bytes());
            report.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            exit_code(&e)
        }
    }
}

/// Rendered output of a command and its exit code.
pub struct Report {
    pub text: String,
    pub code: i32,
}

impl Report {
    fn new(g: &Global, json: Value, text: String, code: i32) -> Self {
        let text = if g.json {
            serde_json::to_string_pretty(&json).expect("reports serialize") + "\n"
        } else {
            text
        };
        Report { text, code }
    }
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Prolong { field, order, points, .. } => cmd_prolong(g, field, *order, *points),
        Command::CheckSymmetry { scheme } => cmd_check_symmetry(g, scheme),
        Command::ContactAnalyze {
            field,
            order,
            numeric,
            samples,
            ..
        } => cmd_contact_analyze(g, field, *order, *numeric, *samples),
        Command::LimitCheck {
            file,
            h_sequence,
            curve,
            at,
            levels,
        } => cmd_limit_check(g, file, h_sequence, curve, *at, *levels),
        Command::Step { scheme, initial, steps } => cmd_step(g, scheme, initial, *steps),
    }
}

fn names(vars: &std::collections::BTreeSet<Var>) -> Vec<String> {
    vars.iter().map(|v| v.to_string()).collect()
}

fn cmd_prolong(g: &Global, path: &PathBuf, order: usize, points: bool) -> Result<Report> {
    let f = load_field(path)?;
    let r = prolong_discrete(&f.field, order)?;
    let mut text = format!(
        "field {} (order {}), chart of {} points, {} coordinates\n",
        f.name,
        f.field.order,
        r.chart_points,
        if points { "point" } else { "chart" }
    );
    let mut levels = Vec::new();
    for level in &r.levels {
        let fp = prolongation_footprint(&r, level.k)?;
        let (kappa, phi) = if points {
            (&level.kappa, &level.phi)
        } else {
            (&level.kappa_chart, &level.phi_chart)
        };
        text += &format!("kappa^({}) = {}\n", level.k, kappa);
        text += &format!("phi^({}) = {}\n", level.k, phi);
        text += &format!("  kappa^({}) depends on: {}\n", level.k, names(&fp.kappa).join(", "));
        text += &format!("  phi^({}) depends on: {}\n", level.k, names(&fp.phi).join(", "));
        levels.push(json!({
            "k": level.k,
            "kappa": kappa.to_string(),
            "phi": phi.to_string(),
            "footprint": { "kappa": names(&fp.kappa), "phi": names(&fp.phi) },
        }));
    }
    let doc = json!({
        "field": f.name,
        "field_order": f.field.order,
        "chart_points": r.chart_points,
        "coordinates": if points { "points" } else { "chart" },
        "levels": levels,
    });
    Ok(Report::new(g, doc, text, EXIT_OK))
}

fn cmd_check_symmetry(g: &Global, path: &PathBuf) -> Result<Report> {
    let sf = load_scheme(path)?;
    let s = &sf.scheme;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let window = random_window(s, &mut rng)?;
    if !check_independence(s, &Stencil { points: window })? {
        return Err(Error::InvalidScheme(
            "the relations do not determine the last point on a probe window".into(),
        ));
    }
    let zt = ZeroTest::new(crate::expr::zero::DEFAULT_TRIALS, g.seed);
    let tolerance = g.tolerance.unwrap_or(NUMERIC_TOLERANCE);
    let mut text = format!("scheme {} ({} points)\n", s.name, s.points);
    let mut rows = Vec::new();
    let mut all = true;
    for c in &sf.candidates {
        let r = invariance_residual(&c.field, s, &mut rng)?;
        let ok = r.vanishes(&zt, tolerance)?;
        all &= ok;
        let verdict = if ok { "symmetry" } else { "not a symmetry" };
        let (method, detail) = match &r {
            ManifoldResidual::Symbolic { residuals } => (
                "symbolic",
                json!([residuals[0].to_string(), residuals[1].to_string()]),
            ),
            ManifoldResidual::Numeric { max, .. } => ("numeric", json!(max)),
        };
        text += &format!("{}: {}", c.name, verdict);
        if !ok {
            match &r {
                ManifoldResidual::Symbolic { residuals } => {
                    text += &format!(" (residuals {}, {})", residuals[0], residuals[1])
                }
                ManifoldResidual::Numeric { max, .. } => {
                    text += &format!(" (max residuals {:e}, {:e})", max[0], max[1])
                }
            }
        }
        text.push('\n');
        rows.push(json!({
            "name": c.name,
            "verdict": verdict,
            "method": method,
            "residuals": detail,
        }));
    }
    let doc = json!({ "scheme": s.name, "points": s.points, "candidates": rows });
    Ok(Report::new(g, doc, text, if all { EXIT_OK } else { EXIT_NOT_SYMMETRY }))
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Vanishes => "holds".into(),
        Outcome::Forces { prefactor, core } => format!("({}) * {} = 0", prefactor, core),
        Outcome::Violated => "violated".into(),
        Outcome::Unresolved => "unresolved".into(),
    }
}

fn classification_text(name: &str, c: &Classification) -> String {
    let mut t = format!("field {}, order {}, {} analysis\n", name, c.order, c.method);
    if let Some(cc) = &c.conditions {
        t += "closure conditions:\n";
        for cond in &cc.conditions {
            t += &format!(
                "  d {} / d {}: {}\n",
                cond.coefficient,
                cond.variable,
                outcome_text(&cond.outcome)
            );
        }
        if !cc.constraints.is_empty() {
            t += "derived:\n";
            for k in &cc.constraints {
                t += &format!("  {} = 0  =>  {}\n", k.found, k.text);
            }
        }
    }
    if let Some(s) = &c.sensitivity {
        t += &format!("sensitivities ({} samples, delta {:e}):\n", s.samples, s.delta);
        for e in &s.entries {
            t += &format!("  d {} / d {}: {:e}\n", e.coefficient, e.variable, e.max);
        }
    }
    t += &format!("verdict: {}\n", c.verdict);
    if let Some(w) = &c.witness {
        t += &format!("witness: {} depends on {}\n", w.coefficient, w.variable);
    }
    if let Some(n) = &c.note {
        t += &format!("note: {}\n", n);
    }
    t
}

fn cmd_contact_analyze(g: &Global, path: &PathBuf, order: usize, numeric: bool, samples: usize) -> Result<Report> {
    let f = load_field(path)?;
    let c = if numeric {
        let opts = Sampling {
            samples,
            seed: g.seed,
            lattice: f.lattice.clone(),
            ..Sampling::default()
        };
        contact::classify_numeric(&f.field, order, &opts, g.tolerance.unwrap_or(SENSITIVITY_THRESHOLD))?
    } else {
        match &f.lattice {
            Lattice::Transforming => contact::classify(&f.field, order)?,
            Lattice::Fixed(h) => contact::classify_evolutionary(&f.field, order, h.clone())?,
        }
    };
    let text = classification_text(&f.name, &c);
    let mut doc = serde_json::to_value(&c).expect("classification serializes");
    doc["field"] = json!(f.name);
    Ok(Report::new(g, doc, text, EXIT_OK))
}

/// Test curve for `limit-check`.
#[derive(Clone, Debug)]
pub enum Curve {
    Exp,
    Sin,
    Expr(Expr),
}

impl Curve {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Curve::Exp),
            "sin" => Ok(Curve::Sin),
            _ => {
                let e = parse(s)?;
                if let Some(v) = e.free_vars().iter().find(|v| **v != JetVariables::x()) {
                    return Err(Error::Probe(format!("curve may only mention `x`, found `{}`", v)));
                }
                Ok(Curve::Expr(e))
            }
        }
    }

    /// `k`-th derivative at `x`.
    pub fn derivative(&self, k: usize, x: f64) -> Result<f64> {
        match self {
            Curve::Exp => Ok(x.exp()),
            Curve::Sin => Ok(match k % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            }),
            Curve::Expr(e) => {
                let mut d = e.clone();
                for _ in 0..k {
                    d = d.diff(&JetVariables::x());
                }
                let mut vals = BTreeMap::new();
                vals.insert(JetVariables::x(), x);
                eval_f64(&d, &vals)
            }
        }
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.derivative(0, x)
    }

    fn stencil(&self, x0: f64, h: f64, points: usize) -> Result<Stencil<f64>> {
        let points = (0..points)
            .map(|j| {
                let x = x0 + h * j as f64;
                Ok((x, self.value(x)?))
            })
            .collect::<Result<_>>()?;
        Ok(Stencil { points })
    }
}

/// Convergence of `p^(k)` to `y^(k)` at `x0` on a curve, uniform spacing.
pub fn probe_discrete_derivative(curve: &Curve, k: usize, x0: f64, h_list: &[f64]) -> Result<Convergence> {
    let target = curve.derivative(k, x0)?;
    continuous_limit_probe(
        |h| {
            let d = curve.stencil(x0, h, k + 1)?.derivative_table()?;
            Ok(d[k][k].expect("table entry exists"))
        },
        target,
        h_list,
    )
}

/// Convergence of the discrete `phi^(1)` of a point field to the continuous one.
pub fn probe_first_prolongation(
    field: &MultiPointVectorField,
    curve: &Curve,
    x0: f64,
    h_list: &[f64],
) -> Result<Convergence> {
    if field.order != 0 {
        return Err(Error::InvalidField("the continuous limit is probed for point fields".into()));
    }
    let mut to_jet = BTreeMap::new();
    to_jet.insert(x_var(0), Expr::var(JetVariables::x()));
    to_jet.insert(y_var(0), Expr::var(JetVariables::y(0)));
    let cont = ContinuousField::point(field.xi.substitute(&to_jet), field.phi.substitute(&to_jet))?;
    let phi1 = prolong_continuous(&cont, 1).remove(0);
    let mut jet = BTreeMap::new();
    jet.insert(JetVariables::x(), x0);
    jet.insert(JetVariables::y(0), curve.value(x0)?);
    jet.insert(JetVariables::y(1), curve.derivative(1, x0)?);
    let target = eval_f64(&phi1, &jet)?;
    let discrete = phi_levels(field, 1).remove(0);
    continuous_limit_probe(
        |h| {
            let s = curve.stencil(x0, h, 2)?;
            let mut vals = BTreeMap::new();
            for (j, (x, y)) in s.points.iter().enumerate() {
                vals.insert(x_var(j as i32), *x);
                vals.insert(y_var(j as i32), *y);
            }
            eval_f64(&discrete, &vals)
        },
        target,
        h_list,
    )
}

fn convergence_json(name: &str, c: &Convergence) -> Value {
    json!({ "quantity": name, "h": c.h, "errors": c.errors, "order": c.order, "exact": c.exact })
}

fn cmd_limit_check(
    g: &Global,
    path: &PathBuf,
    h_list: &[f64],
    curve_text: &str,
    x0: f64,
    levels: Option<usize>,
) -> Result<Report> {
    let curve = Curve::parse(curve_text)?;
    let def = load_definition(path)?;
    let (name, default_levels, fields) = match &def {
        Definition::Field(f) => (f.name.clone(), 2, vec![(f.name.clone(), f.field.clone())]),
        Definition::Scheme(s) => (
            s.scheme.name.clone(),
            s.scheme.points - 1,
            s.candidates.iter().map(|c| (c.name.clone(), c.field.clone())).collect(),
        ),
    };
    let levels = levels.unwrap_or(default_levels);
    let mut rows: Vec<(String, Convergence)> = Vec::new();
    for k in 1..=levels {
        rows.push((format!("p^({})", k), probe_discrete_derivative(&curve, k, x0, h_list)?));
    }
    let mut skipped = Vec::new();
    for (fname, f) in &fields {
        if f.order == 0 && !f.xi.has_unknowns() && !f.phi.has_unknowns() {
            rows.push((format!("phi^(1) of {}", fname), probe_first_prolongation(f, &curve, x0, h_list)?));
        } else {
            skipped.push(fname.clone());
        }
    }
    let min = g.tolerance.unwrap_or(MIN_ORDER);
    let pass = rows.iter().all(|(_, c)| c.at_least(min));
    let mut text = format!("{}: curve {}, x0 = {}\n", name, curve_text, x0);
    text += &format!("{:<28}", "quantity");
    for h in h_list {
        text += &format!(" {:>12}", format!("h={}", h));
    }
    text += "        order\n";
    for (q, c) in &rows {
        text += &format!("{:<28}", q);
        for e in &c.errors {
            text += &format!(" {:>12.4e}", e);
        }
        match c.order {
            _ if c.exact => text += "        exact\n",
            Some(o) => text += &format!(" {:>12.3}\n", o),
            None => text += "            -\n",
        }
    }
    for s in &skipped {
        text += &format!("{}: skipped (not a concrete point field)\n", s);
    }
    text += if pass { "all orders >= " } else { "some order below " };
    text += &format!("{}\n", min);
    let doc = json!({
        "definition": name,
        "curve": curve_text,
        "x0": x0,
        "minimum_order": min,
        "quantities": rows.iter().map(|(q, c)| convergence_json(q, c)).collect::<Vec<_>>(),
        "skipped": skipped,
        "pass": pass,
    });
    Ok(Report::new(g, doc, text, if pass { EXIT_OK } else { EXIT_DIVERGENCE }))
}

/// Parses `x,y;x,y;...`.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |m: &str| Error::Syntax {
        offset: 0,
        message: format!("initial points: {}", m),
    };
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (x, y) = p.split_once(',').ok_or_else(|| bad("expected `x,y`"))?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", t.trim())));
            Ok((num(x)?, num(y)?))
        })
        .collect()
}

fn cmd_step(g: &Global, path: &PathBuf, initial: &str, steps: usize) -> Result<Report> {
    let sf = load_scheme(path)?;
    let s = &sf.scheme;
    let initial = parse_points(initial)?;
    if initial.len() + 1 != s.points {
        return Err(Error::InvalidStencil(format!(
            "{} initial points given, the scheme needs {}",
            initial.len(),
            s.points - 1
        )));
    }
    let opts = Newton {
        tolerance: g.tolerance.unwrap_or(Newton::default().tolerance),
        ..Newton::default()
    };
    let t = trajectory_with(s, &initial, steps, opts)?;
    let mut text = String::new();
    for (j, (x, y)) in t.points.iter().enumerate() {
        text += &format!("{} {} {}\n", j, x, y);
    }
    let doc = json!({
        "scheme": s.name,
        "points": t.points.iter().enumerate().map(|(j, (x, y))| json!({"j": j, "x": x, "y": y})).collect::<Vec<_>>(),
    });
    Ok(Report::new(g, doc, text, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_lists() {
        assert_eq!(parse_points("0,0;1,1").unwrap(), vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(parse_points(" -1.5, 2 ; ").unwrap(), vec![(-1.5, 2.0)]);
        assert!(parse_points("0;1").is_err());
        assert!(parse_points("a,1").is_err());
    }

    #[test]
    fn curves() {
        let c = Curve::parse("x^3").unwrap();
        assert_eq!(c.derivative(2, 2.0).unwrap(), 12.0);
        assert_eq!(Curve::parse("sin").unwrap().derivative(1, 0.0).unwrap(), 1.0);
        assert!(Curve::parse("y").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Syntax { offset: 0, message: String::new() }), EXIT_PARSE);
        assert_eq!(exit_code(&Error::SingularJacobian { det: 0.0 }), EXIT_INVARIANT);
        assert_eq!(
            exit_code(&Error::UnsupportedOrder { order: 9, reason: String::new() }),
            EXIT_UNSUPPORTED
        );
        assert_eq!(
            exit_code(&Error::NewtonDivergence { iterations: 1, residual: 1.0 }),
            EXIT_DIVERGENCE
        );
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["dslie", "frobnicate"], &mut o, &mut e), EXIT_PARSE);
        assert_eq!(run(["dslie", "--help"], &mut o, &mut e), EXIT_OK);
    }

    #[test]
    fn probes() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let c = probe_discrete_derivative(&Curve::Exp, 2, 0.0, &h).unwrap();
        assert!(c.at_least(0.9) && !c.exact);
        let c = probe_discrete_derivative(&Curve::parse("x^2").unwrap(), 2, 0.0, &h).unwrap();
        assert!(c.exact);
        let f = MultiPointVectorField::point(parse("y[n]^2").unwrap(), parse("x[n]").unwrap()).unwrap();
        let c = probe_first_prolongation(&f, &Curve::Exp, 0.0, &h).unwrap();
        assert!(c.at_least(0.9) && !c.exact, "{:?}", c);
    }
}
