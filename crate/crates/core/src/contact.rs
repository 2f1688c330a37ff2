//! Closure analysis for multi-point (contact-type) vector fields.
//!
//! A field of order `l` involves the points `n .. n+l`. Its prolongation to
//! level `l` is written on the chart of `2l+1` points; the chart variables of
//! the points beyond `n+l` (`h[n+m]`, `p{m}[n+m]`, `l < m <= 2l`) are *extra*.
//! The prolongation closes when no coefficient depends on an extra variable.
//!
//! Each closure condition `d(coefficient)/d(extra variable) = 0` is reduced by
//! the vanishing statements found so far. A condition that reduces to
//! `c * A = 0` with `A` a single unknown partial and `c != 0` yields the new
//! statement `A = 0`, which is used from then on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::eval::eval_f64;
use crate::expr::{Expr, Node, Rational, UnknownFn, Var, ZeroRule, ZeroTest};
use crate::prolong::{phi_levels, point_args, ser_expr, tidy, MultiPointVectorField};
use crate::stencil::{h_var, p_var, symbolic_chart_substitution, x_var, y_var, StencilChart};

/// Highest order handled by the symbolic derivation.
pub const MAX_SYMBOLIC_ORDER: usize = 2;
/// Highest order handled by the sampling oracle.
pub const MAX_NUMERIC_ORDER: usize = 4;

/// Whether the lattice moves with the transformation or is fixed, `x[n+j] = x[n] + j*h`.
#[derive(Clone, Debug, PartialEq)]
pub enum Lattice {
    Transforming,
    Fixed(Rational),
}

/// A prolongation coefficient: `kappa^(k)` (on `h[n+k]`) or `phi^(k)` (on `p{k}[n+k]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coefficient {
    Kappa(usize),
    Phi(usize),
}

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Kappa(k) => write!(f, "kappa^({})", k),
            Coefficient::Phi(k) => write!(f, "phi^({})", k),
        }
    }
}

/// How a closure condition was settled.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Holds identically given the earlier statements.
    Vanishes,
    /// Forces the unknown partial `core` to vanish.
    Forces {
        #[serde(serialize_with = "ser_expr")]
        prefactor: Expr,
        #[serde(serialize_with = "ser_expr")]
        core: Expr,
    },
    /// Nonzero and free of unknown functions: the prolongation does not close.
    Violated,
    /// Not reducible to a single vanishing statement.
    Unresolved,
}

/// `d(coefficient)/d(variable)` and its reduction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub coefficient: Coefficient,
    #[serde(serialize_with = "ser_var")]
    pub variable: Var,
    /// The derivative as computed, in chart coordinates.
    #[serde(serialize_with = "ser_expr")]
    pub raw: Expr,
    /// After applying the statements known when the condition was examined.
    #[serde(serialize_with = "ser_expr")]
    pub reduced: Expr,
    pub outcome: Outcome,
}

fn ser_var<S: serde::Serializer>(v: &Var, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// A derived vanishing statement `d^slots f = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    #[serde(skip)]
    pub rule: ZeroRule,
    /// The partial as it appeared in the condition, in point coordinates
    /// (e.g. the derivative of `xi_{n+1}` with respect to `y[n+2]`).
    #[serde(serialize_with = "ser_expr")]
    pub found: Expr,
    /// The same statement for the coefficient at `n`.
    #[serde(serialize_with = "ser_expr")]
    pub statement: Expr,
    /// Readable form, e.g. `d xi_n / d y[n+1] = 0`.
    pub text: String,
}

/// The ordered closure conditions of a field and the statements they force.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureConditions {
    pub order: usize,
    #[serde(serialize_with = "ser_vars")]
    pub extra: Vec<Var>,
    pub conditions: Vec<Condition>,
    pub constraints: Vec<Constraint>,
}

fn ser_vars<S: serde::Serializer>(v: &[Var], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The prolongation closes and the field is a point field.
    Point,
    /// Some coefficient depends on an extra point.
    NonClosing,
    /// Neither could be established.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Point => "Point",
            Verdict::NonClosing => "NonClosing",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

/// The coefficient and extra variable exhibiting non-closure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub coefficient: Coefficient,
    #[serde(serialize_with = "ser_var")]
    pub variable: Var,
    /// The nonzero derivative (symbolic path) if available.
    #[serde(serialize_with = "ser_opt_expr")]
    pub derivative: Option<Expr>,
    /// Largest sampled sensitivity (numeric path) if available.
    pub sensitivity: Option<f64>,
}

fn ser_opt_expr<S: serde::Serializer>(e: &Option<Expr>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub order: usize,
    pub method: &'static str,
    pub conditions: Option<ClosureConditions>,
    pub witness: Option<Witness>,
    pub sensitivity: Option<Sensitivity>,
    /// Why the verdict is inconclusive, when it is.
    pub note: Option<String>,
}

fn unsupported(order: usize, max: usize, what: &str) -> Error {
    Error::UnsupportedOrder {
        order,
        reason: format!("the {} path supports orders 1..={}", what, max),
    }
}

/// Point-coordinate prolongation coefficients `(kappa^(k), phi^(k))`, `k = 1..=l`.
fn point_coefficients(f: &MultiPointVectorField, l: usize) -> Vec<(Coefficient, Expr)> {
    let mut out = Vec::new();
    for (i, phi) in phi_levels(f, l).into_iter().enumerate() {
        let k = i + 1;
        out.push((Coefficient::Kappa(k), f.xi_at(k as i32) - f.xi_at(k as i32 - 1)));
        out.push((Coefficient::Phi(k), phi));
    }
    out
}

fn chart_map(points: usize, lattice: &Lattice) -> BTreeMap<Var, Expr> {
    let mut chart = symbolic_chart_substitution(points);
    if let Lattice::Fixed(h) = lattice {
        let mut fixed = BTreeMap::new();
        for m in 1..points as i32 {
            fixed.insert(h_var(m), Expr::constant(h.clone()));
        }
        chart = chart.into_iter().map(|(k, v)| (k, v.substitute(&fixed))).collect();
    }
    chart
}

/// Extra chart variables for order `l`, highest point first, `p` before `h`.
fn extra_vars(l: usize, lattice: &Lattice) -> Vec<Var> {
    let mut v = Vec::new();
    for m in (l + 1..=2 * l).rev() {
        v.push(p_var(m));
        if *lattice == Lattice::Transforming {
            v.push(h_var(m as i32));
        }
    }
    v
}

fn unknown_atoms(e: &Expr, out: &mut BTreeSet<Expr>) {
    match e.node() {
        Node::Apply(..) | Node::Deriv(..) => {
            out.insert(e.clone());
        }
        _ => {
            if e.has_unknowns() {
                for c in e.children() {
                    unknown_atoms(c, out);
                }
            }
        }
    }
}

fn replace(e: &Expr, target: &Expr, with: &Expr) -> Expr {
    e.rebuild(&mut |s| {
        if s == target {
            Some(with.clone())
        } else if !s.has_unknowns() {
            Some(s.clone())
        } else {
            None
        }
    })
}

/// `Some((c, A))` when `e = c * A` with `A` a single unknown partial and `c != 0`.
fn single_factor(e: &Expr, zt: &ZeroTest) -> Result<Option<(Expr, Expr)>> {
    let mut atoms = BTreeSet::new();
    unknown_atoms(e, &mut atoms);
    if atoms.len() != 1 {
        return Ok(None);
    }
    let atom = atoms.into_iter().next().unwrap();
    let u = Var::plain("__u");
    let eu = replace(e, &atom, &Expr::var(u.clone()));
    let mut at_zero = BTreeMap::new();
    at_zero.insert(u.clone(), Expr::zero());
    if !zt.is_zero(&eu.substitute(&at_zero))? {
        return Ok(None);
    }
    let c = eu.diff(&u);
    if c.contains_var(&u) && !zt.is_zero(&c.diff(&u))? {
        return Ok(None);
    }
    if zt.is_zero(&c)? {
        return Ok(None);
    }
    Ok(Some((tidy(&c), atom)))
}

fn rule_of(atom: &Expr) -> ZeroRule {
    match atom.node() {
        Node::Apply(f, _) => ZeroRule::new(f.clone(), vec![]),
        Node::Deriv(f, s, _) => ZeroRule::new(f.clone(), s.clone()),
        _ => unreachable!("atoms are applications"),
    }
}

fn atom_args(atom: &Expr) -> &[Expr] {
    match atom.node() {
        Node::Apply(_, a) | Node::Deriv(_, _, a) => a,
        _ => unreachable!("atoms are applications"),
    }
}

/// Describes a vanishing partial in point coordinates.
fn constraint(
    f: &MultiPointVectorField,
    rule: ZeroRule,
    atom: &Expr,
    chart: &BTreeMap<Var, Expr>,
    l: usize,
) -> Constraint {
    let base_args = base_args_of(f, &rule.func).unwrap_or_else(|| point_args(f.order));
    let statement = if rule.slots.is_empty() {
        rule.func.call(base_args.clone())
    } else {
        rule.func.partial(&rule.slots, base_args.clone())
    }
    .expect("rule matches the function's arity");
    let args = atom_args(atom);
    let shift = (0..=l as i32)
        .find(|s| {
            base_args
                .iter()
                .zip(args)
                .all(|(b, a)| b.shift(*s).substitute(chart) == *a)
        })
        .unwrap_or(0);
    let found = statement.shift(shift);
    let name = |s: i32| {
        if s == 0 {
            format!("{}_n", rule.func.name())
        } else {
            format!("{}_{{n+{}}}", rule.func.name(), s)
        }
    };
    let text = if rule.slots.is_empty() {
        format!("{} = 0", name(0))
    } else {
        let wrt: Vec<String> = rule
            .slots
            .iter()
            .map(|&s| base_args[s].to_string())
            .collect();
        format!("d{} {} / d {} = 0", if wrt.len() > 1 { format!("^{}", wrt.len()) } else { String::new() }, name(0), wrt.join(" d "))
    };
    Constraint {
        rule,
        found,
        statement,
        text,
    }
}

/// Argument list with which `func` is applied in the field's coefficients.
fn base_args_of(f: &MultiPointVectorField, func: &UnknownFn) -> Option<Vec<Expr>> {
    fn find(e: &Expr, func: &UnknownFn) -> Option<Vec<Expr>> {
        match e.node() {
            Node::Apply(g, a) | Node::Deriv(g, _, a) if g == func => Some(a.clone()),
            _ => e.children().iter().find_map(|c| find(c, func)),
        }
    }
    find(&f.xi, func).or_else(|| find(&f.phi, func))
}

fn check_order(f: &MultiPointVectorField, l: usize, max: usize, what: &str) -> Result<()> {
    if l == 0 || l > max {
        return Err(unsupported(l, max, what));
    }
    if f.order > l {
        return Err(Error::InvalidField(format!(
            "field involves {} points, more than order {} allows",
            f.order + 1,
            l
        )));
    }
    f.validate()
}

fn derive(f: &MultiPointVectorField, l: usize, lattice: &Lattice, zt: &ZeroTest) -> Result<ClosureConditions> {
    let chart = chart_map(2 * l + 1, lattice);
    let extra = extra_vars(l, lattice);
    let coefficients: Vec<(Coefficient, Expr)> = point_coefficients(f, l)
        .into_iter()
        .filter(|(c, _)| *lattice == Lattice::Transforming || matches!(c, Coefficient::Phi(_)))
        .map(|(c, e)| (c, e.substitute(&chart)))
        .collect();
    let mut pending: Vec<(Coefficient, Var, Expr)> = Vec::new();
    for v in &extra {
        for (c, e) in &coefficients {
            pending.push((*c, v.clone(), e.diff(v)));
        }
    }
    let mut conditions = Vec::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut rules: Vec<ZeroRule> = Vec::new();
    loop {
        let mut progressed = false;
        let mut still = Vec::new();
        for (c, v, raw) in pending {
            let reduced = raw.apply_zero_rules(&rules);
            let outcome = if zt.is_zero(&reduced)? {
                Outcome::Vanishes
            } else if !reduced.has_unknowns() {
                Outcome::Violated
            } else if let Some((prefactor, core)) = single_factor(&reduced, zt)? {
                let rule = rule_of(&core);
                if !rules.contains(&rule) {
                    rules.push(rule.clone());
                    constraints.push(constraint(f, rule, &core, &chart, l));
                }
                Outcome::Forces { prefactor, core }
            } else {
                still.push((c, v, raw));
                continue;
            };
            progressed = true;
            conditions.push(Condition {
                coefficient: c,
                variable: v,
                raw: tidy(&raw),
                reduced: tidy(&reduced),
                outcome,
            });
        }
        pending = still;
        if !progressed || pending.is_empty() {
            break;
        }
    }
    for (c, v, raw) in pending {
        let reduced = raw.apply_zero_rules(&rules);
        conditions.push(Condition {
            coefficient: c,
            variable: v,
            raw: tidy(&raw),
            reduced: tidy(&reduced),
            outcome: Outcome::Unresolved,
        });
    }
    Ok(ClosureConditions {
        order: l,
        extra,
        conditions,
        constraints,
    })
}

/// Closure conditions of an order-`l` field on a transforming lattice (`l <= 2`).
pub fn derive_closure_conditions(f: &MultiPointVectorField, l: usize) -> Result<ClosureConditions> {
    check_order(f, l, MAX_SYMBOLIC_ORDER, "symbolic")?;
    derive(f, l, &Lattice::Transforming, &ZeroTest::default())
}

/// Does the field, after the derived statements, depend on any point beyond `n`?
fn residual_dependence(f: &MultiPointVectorField, rules: &[ZeroRule], zt: &ZeroTest) -> Result<Vec<Var>> {
    let mut deps = Vec::new();
    for j in 1..=f.order as i32 {
        for v in [x_var(j), y_var(j)] {
            for e in [&f.xi, &f.phi] {
                let d = e.diff(&v).apply_zero_rules(rules);
                if !zt.is_zero(&d)? {
                    deps.push(v.clone());
                    break;
                }
            }
        }
    }
    Ok(deps)
}

fn verdict_from(f: &MultiPointVectorField, cc: ClosureConditions, zt: &ZeroTest) -> Result<Classification> {
    let order = cc.order;
    if let Some(c) = cc.conditions.iter().find(|c| c.outcome == Outcome::Violated) {
        let witness = Witness {
            coefficient: c.coefficient,
            variable: c.variable.clone(),
            derivative: Some(c.reduced.clone()),
            sensitivity: None,
        };
        return Ok(Classification {
            verdict: Verdict::NonClosing,
            order,
            method: "symbolic",
            conditions: Some(cc),
            witness: Some(witness),
            sensitivity: None,
            note: None,
        });
    }
    let rules: Vec<ZeroRule> = cc.constraints.iter().map(|c| c.rule.clone()).collect();
    let deps = residual_dependence(f, &rules, zt)?;
    let unresolved = cc.conditions.iter().any(|c| c.outcome == Outcome::Unresolved);
    let (verdict, note) = if deps.is_empty() {
        (Verdict::Point, None)
    } else {
        let names: Vec<String> = deps.iter().map(|v| v.to_string()).collect();
        let why = if unresolved {
            "some closure conditions could not be reduced"
        } else {
            "the closure conditions hold but do not remove the dependence"
        };
        (
            Verdict::Inconclusive,
            Some(format!("{}; the field still depends on {}", why, names.join(", "))),
        )
    };
    Ok(Classification {
        verdict,
        order,
        method: "symbolic",
        conditions: Some(cc),
        witness: None,
        sensitivity: None,
        note,
    })
}

/// Symbolic classification of an order-`l` candidate (`l <= 2`).
pub fn classify(f: &MultiPointVectorField, l: usize) -> Result<Classification> {
    let zt = ZeroTest::default();
    let cc = derive_closure_conditions(f, l)?;
    verdict_from(f, cc, &zt)
}

/// Classification of an evolutionary field (`xi = 0`) on a fixed lattice with spacing `h`.
pub fn classify_evolutionary(f: &MultiPointVectorField, l: usize, h: Rational) -> Result<Classification> {
    if !f.is_evolutionary() {
        return Err(Error::InvalidField("an evolutionary field has xi = 0".into()));
    }
    if h <= Rational::from_integer(0.into()) {
        return Err(Error::InvalidField("lattice spacing must be positive".into()));
    }
    check_order(f, l, MAX_SYMBOLIC_ORDER, "symbolic")?;
    let zt = ZeroTest::default();
    let cc = derive(f, l, &Lattice::Fixed(h), &zt)?;
    verdict_from(f, cc, &zt)
}

/// Largest sampled `|d coefficient / d extra variable|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityEntry {
    pub coefficient: Coefficient,
    #[serde(serialize_with = "ser_var")]
    pub variable: Var,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    pub order: usize,
    pub samples: usize,
    pub delta: f64,
    pub entries: Vec<SensitivityEntry>,
}

impl Sensitivity {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.max).fold(0.0, f64::max)
    }

    pub fn max_for(&self, c: Coefficient) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.coefficient == c)
            .map(|e| e.max)
            .fold(0.0, f64::max)
    }

    pub fn largest(&self) -> Option<&SensitivityEntry> {
        self.entries.iter().max_by(|a, b| a.max.total_cmp(&b.max))
    }
}

/// Settings for [`numeric_sensitivity`].
#[derive(Clone, Debug, PartialEq)]
pub struct Sampling {
    pub samples: usize,
    pub delta: f64,
    pub seed: u64,
    pub lattice: Lattice,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            samples: 100,
            delta: 1e-5,
            seed: crate::expr::zero::DEFAULT_SEED,
            lattice: Lattice::Transforming,
        }
    }
}

const RETRIES: usize = 10;

fn random_chart(points: usize, lattice: &Lattice, rng: &mut ChaCha8Rng) -> StencilChart<f64> {
    let h = match lattice {
        Lattice::Transforming => (1..points).map(|_| rng.gen_range(0.1..=1.0)).collect(),
        Lattice::Fixed(h) => vec![h.to_f64().unwrap_or(f64::NAN); points - 1],
    };
    StencilChart {
        x0: rng.gen_range(-1.0..=1.0),
        y0: rng.gen_range(-1.0..=1.0),
        h,
        p: (1..points).map(|_| rng.gen_range(-2.0..=2.0)).collect(),
    }
}

fn eval_at(e: &Expr, chart: &StencilChart<f64>) -> Result<f64> {
    let st = chart.from_chart()?;
    let mut vals = BTreeMap::new();
    for (j, (x, y)) in st.points.iter().enumerate() {
        vals.insert(x_var(j as i32), *x);
        vals.insert(y_var(j as i32), *y);
    }
    eval_f64(e, &vals)
}

fn perturbed(chart: &StencilChart<f64>, v: &Var, by: f64) -> StencilChart<f64> {
    let mut c = chart.clone();
    let m = v.offset().expect("chart variables are indexed") as usize;
    if v.name() == "h" {
        c.h[m - 1] += by;
    } else {
        c.p[m - 1] += by;
    }
    c
}

/// Central-difference sensitivities of every level-`k <= l` coefficient to
/// every extra chart variable, maximized over random charts
/// (`h` in `[0.1, 1]`, `p` in `[-2, 2]`, base point in `[-1, 1]`).
pub fn numeric_sensitivity(f: &MultiPointVectorField, l: usize, opts: &Sampling) -> Result<Sensitivity> {
    check_order(f, l, MAX_NUMERIC_ORDER, "numeric")?;
    if f.xi.has_unknowns() || f.phi.has_unknowns() {
        return Err(Error::InvalidField("numeric sensitivity needs concrete coefficients".into()));
    }
    if opts.samples == 0 || opts.delta <= 0.0 {
        return Err(Error::InvalidField("samples must be positive and delta > 0".into()));
    }
    let points = 2 * l + 1;
    let extra = extra_vars(l, &opts.lattice);
    let coefficients: Vec<(Coefficient, Expr)> = point_coefficients(f, l)
        .into_iter()
        .filter(|(c, _)| opts.lattice == Lattice::Transforming || matches!(c, Coefficient::Phi(_)))
        .collect();
    let mut maxima = vec![0.0f64; extra.len() * coefficients.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        let mut attempt = 0;
        loop {
            let chart = random_chart(points, &opts.lattice, &mut rng);
            match sample_once(&chart, &extra, &coefficients, opts.delta) {
                Ok(vals) => {
                    for (m, v) in maxima.iter_mut().zip(vals) {
                        *m = m.max(v);
                    }
                    break;
                }
                Err(Error::DivisionByZero) | Err(Error::NonFinite) if attempt < RETRIES => {
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut entries = Vec::new();
    let mut it = maxima.into_iter();
    for v in &extra {
        for (c, _) in &coefficients {
            entries.push(SensitivityEntry {
                coefficient: *c,
                variable: v.clone(),
                max: it.next().unwrap(),
            });
        }
    }
    Ok(Sensitivity {
        order: l,
        samples: opts.samples,
        delta: opts.delta,
        entries,
    })
}

fn sample_once(
    chart: &StencilChart<f64>,
    extra: &[Var],
    coefficients: &[(Coefficient, Expr)],
    delta: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(extra.len() * coefficients.len());
    for v in extra {
        let up = perturbed(chart, v, delta);
        let down = perturbed(chart, v, -delta);
        for (_, e) in coefficients {
            let d = (eval_at(e, &up)? - eval_at(e, &down)?) / (2.0 * delta);
            if !d.is_finite() {
                return Err(Error::NonFinite);
            }
            out.push(d.abs());
        }
    }
    Ok(out)
}

/// Sampling-based classification for concrete fields (`l <= 4`): a sensitivity
/// above `threshold` is non-closure.
pub fn classify_numeric(
    f: &MultiPointVectorField,
    l: usize,
    opts: &Sampling,
    threshold: f64,
) -> Result<Classification> {
    let s = numeric_sensitivity(f, l, opts)?;
    let zt = ZeroTest::default();
    let largest = s.largest().cloned();
    if let Some(e) = largest.filter(|e| e.max > threshold) {
        return Ok(Classification {
            verdict: Verdict::NonClosing,
            order: l,
            method: "numeric",
            conditions: None,
            witness: Some(Witness {
                coefficient: e.coefficient,
                variable: e.variable.clone(),
                derivative: None,
                sensitivity: Some(e.max),
            }),
            sensitivity: Some(s),
            note: None,
        });
    }
    let deps = residual_dependence(f, &[], &zt)?;
    let (verdict, note) = if deps.is_empty() {
        (Verdict::Point, None)
    } else {
        (
            Verdict::Inconclusive,
            Some("no sampled sensitivity, yet the field depends on later points".to_string()),
        )
    };
    Ok(Classification {
        verdict,
        order: l,
        method: "numeric",
        conditions: None,
        witness: None,
        sensitivity: Some(s),
        note,
    })
}
