//! Multi-point vector fields and their discrete prolongation.
//!
//! A field of order `K` is `X = sum_j xi_{n+j} d/dx[n+j] + phi_{n+j} d/dy[n+j]`
//! where `xi_n`, `phi_n` depend on the points `n .. n+K` and `xi_{n+j}` is the
//! shift of `xi_n` by `j`. Its action on the stencil chart has coefficients
//!
//! ```text
//! kappa^(k) = xi_{n+k} - xi_{n+k-1}                                 (on h[n+k])
//! phi^(k)   = k (phi^(k-1)_{n+k} - phi^(k-1)_{n+k-1}) / (x[n+k] - x[n])
//!             - p{k}[n+k] (xi_{n+k} - xi_n) / (x[n+k] - x[n])      (on p{k}[n+k])
//! ```
//!
//! which is `X` applied to the point-coordinate formulas of `h` and `p{k}`.
//! For `k = 1` this is `(phi_{n+1} - phi_n)/h - p1 (xi_{n+1} - xi_n)/h`; on
//! uniform lattices it agrees with the form `Δ^T phi^(k-1) - p{k} (...)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::poly::normal_form;
use crate::expr::{Expr, UnknownFn, Var, ZeroTest};
use crate::stencil::{chart_vars, discrete_derivative_expr, symbolic_chart_substitution, x_var, y_var};

/// Coefficients `xi_n`, `phi_n` over the points `n .. n+order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPointVectorField {
    pub order: usize,
    pub xi: Expr,
    pub phi: Expr,
}

impl MultiPointVectorField {
    pub fn new(order: usize, xi: Expr, phi: Expr) -> Result<Self> {
        let f = MultiPointVectorField { order, xi, phi };
        f.validate()?;
        Ok(f)
    }

    /// A point field `xi(x[n], y[n]) d/dx + phi(x[n], y[n]) d/dy`.
    pub fn point(xi: Expr, phi: Expr) -> Result<Self> {
        Self::new(0, xi, phi)
    }

    pub fn validate(&self) -> Result<()> {
        for e in [&self.xi, &self.phi] {
            for v in e.free_vars() {
                // plain names other than x, y are constant parameters
                let ok = match v.offset() {
                    Some(j) => matches!(v.name(), "x" | "y") && j >= 0 && j as usize <= self.order,
                    None => !matches!(v.name(), "x" | "y"),
                };
                if !ok {
                    return Err(Error::InvalidField(format!(
                        "`{}` is outside the points x[n], y[n] .. x[n+{}], y[n+{}]",
                        v, self.order, self.order
                    )));
                }
            }
        }
        Ok(())
    }

    /// Fully symbolic field: `xi`, `phi` unknown functions of all `order+1` points.
    pub fn symbolic(order: usize) -> Self {
        let args = point_args(order);
        let labels: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        let xi = UnknownFn::with_labels("xi", &labels);
        let phi = UnknownFn::with_labels("phi", &labels);
        MultiPointVectorField {
            order,
            xi: xi.call(args.clone()).expect("arity matches"),
            phi: phi.call(args).expect("arity matches"),
        }
    }

    /// The variables the coefficients actually mention.
    pub fn support(&self) -> BTreeSet<Var> {
        self.xi.free_vars().union(self.phi.free_vars()).cloned().collect()
    }

    /// Coefficients mention no point beyond `n`.
    pub fn is_point(&self) -> bool {
        self.order == 0 || self.support().iter().all(|v| v.offset().unwrap_or(0) == 0)
    }

    pub fn is_evolutionary(&self) -> bool {
        self.xi.is_zero()
    }

    /// `xi_{n+j}`.
    pub fn xi_at(&self, j: i32) -> Expr {
        self.xi.shift(j)
    }

    /// `phi_{n+j}`.
    pub fn phi_at(&self, j: i32) -> Expr {
        self.phi.shift(j)
    }
}

/// `x[n], y[n], ..., x[n+order], y[n+order]`.
pub fn point_args(order: usize) -> Vec<Expr> {
    (0..=order as i32)
        .flat_map(|j| [Expr::var(x_var(j)), Expr::var(y_var(j))])
        .collect()
}

/// Shifts every lattice index by `m`.
pub fn shift(e: &Expr, m: i32) -> Expr {
    e.shift(m)
}

/// `Δ^T F = (F shifted by one - F) / (x[n+1] - x[n])`, in point coordinates.
pub fn total_difference(f: &Expr) -> Expr {
    (f.shift(1) - f) / (Expr::var(x_var(1)) - Expr::var(x_var(0)))
}

/// Prolongation coefficients at one level `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub k: usize,
    #[serde(serialize_with = "ser_expr")]
    pub kappa: Expr,
    #[serde(serialize_with = "ser_expr")]
    pub phi: Expr,
    #[serde(serialize_with = "ser_expr")]
    pub kappa_chart: Expr,
    #[serde(serialize_with = "ser_expr")]
    pub phi_chart: Expr,
}

pub(crate) fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

/// Coefficients `kappa^(k)`, `phi^(k)` for `k = 1..=k_max`, in point and chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProlongationResult {
    pub field_order: usize,
    /// Number of stencil points the chart forms are written on.
    pub chart_points: usize,
    pub levels: Vec<Level>,
}

impl ProlongationResult {
    pub fn level(&self, k: usize) -> Option<&Level> {
        self.levels.get(k.checked_sub(1)?)
    }
}

/// Canonical form, replaced by the quotient normal form when that is not larger.
pub fn tidy(e: &Expr) -> Expr {
    if e.size() > 4000 {
        return e.clone();
    }
    let n = normal_form(e);
    if n.size() <= e.size() {
        n
    } else {
        e.clone()
    }
}

/// `phi^(k)` in point coordinates, `k = 1..=k_max`.
pub(crate) fn phi_levels(f: &MultiPointVectorField, k_max: usize) -> Vec<Expr> {
    let mut out = Vec::with_capacity(k_max);
    let mut prev = f.phi.clone();
    for k in 1..=k_max {
        let d = Expr::var(x_var(k as i32)) - Expr::var(x_var(0));
        let dxi = f.xi_at(k as i32) - &f.xi;
        let next = Expr::integer(k as i64) * (prev.shift(1) - &prev) / &d
            - discrete_derivative_expr(k, k as i32) * dxi / &d;
        out.push(next.clone());
        prev = next;
    }
    out
}

/// Discrete prolongation up to level `k_max` (at least 1).
pub fn prolong_discrete(f: &MultiPointVectorField, k_max: usize) -> Result<ProlongationResult> {
    if k_max == 0 {
        return Err(Error::UnsupportedOrder {
            order: 0,
            reason: "prolongation level must be at least 1".into(),
        });
    }
    f.validate()?;
    let chart_points = f.order + k_max + 1;
    let chart = symbolic_chart_substitution(chart_points);
    let phis = phi_levels(f, k_max);
    let levels = phis
        .into_iter()
        .enumerate()
        .map(|(i, phi)| {
            let k = i as i32 + 1;
            let kappa = f.xi_at(k) - f.xi_at(k - 1);
            Level {
                k: k as usize,
                kappa_chart: tidy(&kappa.substitute(&chart)),
                phi_chart: tidy(&phi.substitute(&chart)),
                kappa,
                phi,
            }
        })
        .collect();
    Ok(ProlongationResult {
        field_order: f.order,
        chart_points,
        levels,
    })
}

/// The unweighted variant `phi^(k) = Δ^T phi^(k-1) - p{k}(xi_{n+k} - xi_n)/(x[n+k] - x[n])`,
/// in point coordinates. It agrees with [`prolong_discrete`] at `k = 1` and on
/// uniform lattices.
pub fn prolong_discrete_unweighted(f: &MultiPointVectorField, k_max: usize) -> Vec<Expr> {
    let mut out = Vec::with_capacity(k_max);
    let mut prev = f.phi.clone();
    for k in 1..=k_max {
        let d = Expr::var(x_var(k as i32)) - Expr::var(x_var(0));
        let next = total_difference(&prev)
            - discrete_derivative_expr(k, k as i32) * (f.xi_at(k as i32) - &f.xi) / d;
        out.push(next.clone());
        prev = next;
    }
    out
}

/// Chart variables each coefficient of level `k` depends on.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Footprint {
    #[serde(serialize_with = "ser_vars")]
    pub kappa: BTreeSet<Var>,
    #[serde(serialize_with = "ser_vars")]
    pub phi: BTreeSet<Var>,
}

fn ser_vars<S: serde::Serializer>(v: &BTreeSet<Var>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Chart variables on which `e` genuinely depends (probabilistic test of each partial).
pub fn dependence(e: &Expr, candidates: &[Var], zt: &ZeroTest) -> Result<BTreeSet<Var>> {
    let mut out = BTreeSet::new();
    for v in candidates {
        if !e.contains_var(v) {
            continue;
        }
        if !zt.is_zero(&e.diff(v))? {
            out.insert(v.clone());
        }
    }
    Ok(out)
}

pub fn prolongation_footprint(r: &ProlongationResult, k: usize) -> Result<Footprint> {
    let level = r.level(k).ok_or_else(|| Error::UnsupportedOrder {
        order: k,
        reason: format!("only {} level(s) were computed", r.levels.len()),
    })?;
    let vars = chart_vars(r.chart_points);
    let zt = ZeroTest::default();
    Ok(Footprint {
        kappa: dependence(&level.kappa_chart, &vars, &zt)?,
        phi: dependence(&level.phi_chart, &vars, &zt)?,
    })
}

/// `X(e) = sum_j xi_{n+j} de/dx[n+j] + phi_{n+j} de/dy[n+j]` over the points of `e`.
pub fn apply_field(f: &MultiPointVectorField, e: &Expr) -> Expr {
    let mut terms = Vec::new();
    let mut seen = BTreeMap::new();
    for v in e.free_vars() {
        let Some(j) = v.offset() else { continue };
        let coef = match v.name() {
            "x" => seen.entry(("x", j)).or_insert_with(|| f.xi_at(j)).clone(),
            "y" => seen.entry(("y", j)).or_insert_with(|| f.phi_at(j)).clone(),
            _ => continue,
        };
        terms.push(coef * e.diff(v));
    }
    Expr::add(terms)
}
