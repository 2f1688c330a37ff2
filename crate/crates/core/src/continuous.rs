//! Prolongation, symmetry and contact conditions for ordinary differential equations.
//!
//! Jet variables are `x`, `y`, `y1`, `y2`, ... with `y{k}` the k-th derivative.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::eval::eval_f64;
use crate::expr::{Expr, Var, ZeroTest};

/// Jet coordinates up to a fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JetVariables {
    pub order: usize,
}

impl JetVariables {
    pub fn new(order: usize) -> Self {
        JetVariables { order }
    }

    pub fn x() -> Var {
        Var::plain("x")
    }

    /// `y` for `k = 0`, `y{k}` otherwise.
    pub fn y(k: usize) -> Var {
        if k == 0 {
            Var::plain("y")
        } else {
            Var::plain(&format!("y{}", k))
        }
    }

    /// Order of a jet variable, `None` for `x` and foreign variables.
    pub fn order_of(v: &Var) -> Option<usize> {
        if v.offset().is_some() {
            return None;
        }
        let rest = v.name().strip_prefix('y')?;
        if rest.is_empty() {
            return Some(0);
        }
        if rest.starts_with('0') {
            return None;
        }
        rest.parse().ok()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v = vec![Self::x()];
        v.extend((0..=self.order).map(Self::y));
        v
    }
}

/// `X = xi d/dx + phi d/dy` with coefficients on the jet of order `order`
/// (0 for point fields, 1 for contact candidates).
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousField {
    pub xi: Expr,
    pub phi: Expr,
    pub order: usize,
}

impl ContinuousField {
    pub fn new(xi: Expr, phi: Expr, order: usize) -> Result<Self> {
        let f = ContinuousField { xi, phi, order };
        for e in [&f.xi, &f.phi] {
            for v in e.free_vars() {
                let ok = *v == JetVariables::x()
                    || JetVariables::order_of(v).is_some_and(|k| k <= order);
                if !ok {
                    return Err(Error::InvalidField(format!(
                        "`{}` is not a jet variable of order <= {}",
                        v, order
                    )));
                }
            }
        }
        Ok(f)
    }

    pub fn point(xi: Expr, phi: Expr) -> Result<Self> {
        Self::new(xi, phi, 0)
    }
}

/// Total derivative `D_x e = e_x + sum_k y{k+1} e_{y{k}}`.
pub fn total_derivative(e: &Expr) -> Expr {
    let mut terms = vec![e.diff(&JetVariables::x())];
    for v in e.free_vars() {
        if let Some(k) = JetVariables::order_of(v) {
            terms.push(Expr::var(JetVariables::y(k + 1)) * e.diff(v));
        }
    }
    Expr::add(terms)
}

/// `phi^(k) = D_x phi^(k-1) - y{k} D_x xi` for `k = 1..=n`.
pub fn prolong_continuous(f: &ContinuousField, n: usize) -> Vec<Expr> {
    let dxi = total_derivative(&f.xi);
    let mut out = Vec::with_capacity(n);
    let mut prev = f.phi.clone();
    for k in 1..=n {
        let next = total_derivative(&prev) - Expr::var(JetVariables::y(k)) * &dxi;
        out.push(next.clone());
        prev = next;
    }
    out
}

/// `phi_{y1} = y1 xi_{y1}` holds identically.
pub fn check_contact_condition(f: &ContinuousField) -> Result<bool> {
    let y1 = JetVariables::y(1);
    let lhs = f.phi.diff(&y1);
    let rhs = Expr::var(y1.clone()) * f.xi.diff(&y1);
    ZeroTest::default().equal(&lhs, &rhs)
}

/// Contact field generated by a characteristic `W(x, y, y1)`:
/// `xi = -W_{y1}`, `phi = W - y1 W_{y1}`.
pub fn contact_from_characteristic(w: &Expr) -> Result<ContinuousField> {
    let y1 = JetVariables::y(1);
    let wp = w.diff(&y1);
    ContinuousField::new(-&wp, w - Expr::var(y1) * &wp, 1)
}

/// Residual of `pr X (y{n} - F)` on `y{n} = F`; zero iff `X` is a symmetry.
pub fn check_symmetry_ode(f: &ContinuousField, rhs: &Expr, n: usize) -> Result<Expr> {
    if n == 0 {
        return Err(Error::UnsupportedOrder {
            order: 0,
            reason: "the equation order must be at least 1".into(),
        });
    }
    if rhs.free_vars().iter().any(|v| {
        JetVariables::order_of(v).is_some_and(|k| k >= n)
    }) {
        return Err(Error::InvalidField(format!(
            "right-hand side must not involve derivatives of order >= {}",
            n
        )));
    }
    let pr = prolong_continuous(f, n);
    let mut act = vec![f.xi.clone() * rhs.diff(&JetVariables::x())];
    act.push(f.phi.clone() * rhs.diff(&JetVariables::y(0)));
    for k in 1..n {
        act.push(pr[k - 1].clone() * rhs.diff(&JetVariables::y(k)));
    }
    let residual = pr[n - 1].clone() - Expr::add(act);
    let mut on_shell = BTreeMap::new();
    on_shell.insert(JetVariables::y(n), rhs.clone());
    Ok(residual.substitute(&on_shell))
}

/// Integrates `dx/dl = xi, dy/dl = phi` from `start` to parameter `lambda`
/// with `steps` classical Runge-Kutta steps.
pub fn integrate_flow(
    f: &ContinuousField,
    start: (f64, f64),
    lambda: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    if f.order != 0 || f.xi.has_unknowns() || f.phi.has_unknowns() {
        return Err(Error::InvalidField(
            "flows are integrated for concrete point fields only".into(),
        ));
    }
    if steps == 0 {
        return Err(Error::InvalidField("at least one step is required".into()));
    }
    let rhs = |x: f64, y: f64| -> Result<(f64, f64)> {
        let mut vals = BTreeMap::new();
        vals.insert(JetVariables::x(), x);
        vals.insert(JetVariables::y(0), y);
        Ok((eval_f64(&f.xi, &vals)?, eval_f64(&f.phi, &vals)?))
    };
    let dl = lambda / steps as f64;
    let (mut x, mut y) = start;
    for _ in 0..steps {
        let k1 = rhs(x, y)?;
        let k2 = rhs(x + 0.5 * dl * k1.0, y + 0.5 * dl * k1.1)?;
        let k3 = rhs(x + 0.5 * dl * k2.0, y + 0.5 * dl * k2.1)?;
        let k4 = rhs(x + dl * k3.0, y + dl * k3.1)?;
        x += dl / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += dl / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn point(xi: &str, phi: &str) -> ContinuousField {
        ContinuousField::point(p(xi), p(phi)).unwrap()
    }

    #[test]
    fn total_derivatives() {
        assert_eq!(total_derivative(&p("y")), p("y1"));
        assert_eq!(total_derivative(&p("x*y1")), p("y1 + x*y2"));
        assert_eq!(total_derivative(&p("y1^2/2")), p("y1*y2"));
    }

    #[test]
    fn prolongations() {
        assert_eq!(prolong_continuous(&point("1", "0"), 2), vec![p("0"), p("0")]);
        assert_eq!(prolong_continuous(&point("x", "y"), 2), vec![p("0"), p("-y2")]);
        assert_eq!(prolong_continuous(&point("0", "x"), 2), vec![p("1"), p("0")]);
        assert_eq!(
            prolong_continuous(&point("y", "0"), 2),
            vec![p("-y1^2"), p("-3*y1*y2")]
        );
    }

    #[test]
    fn contact_condition() {
        assert!(check_contact_condition(&point("x*y", "y^2")).unwrap());
        let f = ContinuousField::new(p("-y1"), p("-y1^2/2"), 1).unwrap();
        assert!(check_contact_condition(&f).unwrap());
        let f = ContinuousField::new(p("0"), p("y1^2"), 1).unwrap();
        assert!(!check_contact_condition(&f).unwrap());
    }

    #[test]
    fn characteristic_generator() {
        let f = contact_from_characteristic(&p("y")).unwrap();
        assert_eq!((f.xi, f.phi), (p("0"), p("y")));
        let f = contact_from_characteristic(&p("y1^2/2")).unwrap();
        assert_eq!((f.xi, f.phi), (p("-y1"), p("-y1^2/2")));
        let f = contact_from_characteristic(&p("x*y1")).unwrap();
        assert_eq!((f.xi, f.phi), (p("-x"), p("0")));
    }

    #[test]
    fn contact_prolongation_has_no_second_derivative() {
        let f = contact_from_characteristic(&p("y1^3 + x*y*y1")).unwrap();
        let pr = prolong_continuous(&f, 1);
        let d = pr[0].diff(&JetVariables::y(2));
        assert!(ZeroTest::default().is_zero(&d).unwrap());
    }

    #[test]
    fn free_particle_symmetries() {
        let zero = p("0");
        for (xi, phi) in [("1", "0"), ("0", "x"), ("y", "0"), ("x^2", "x*y")] {
            let r = check_symmetry_ode(&point(xi, phi), &zero, 2).unwrap();
            assert!(r.is_zero(), "{} {} -> {}", xi, phi, r);
        }
        let r = check_symmetry_ode(&point("0", "y^2"), &zero, 2).unwrap();
        assert!(!r.is_zero());
    }

    #[test]
    fn flows() {
        assert_eq!(integrate_flow(&point("1", "0"), (0.0, 0.0), 1.0, 8).unwrap(), (1.0, 0.0));
        let (x, y) = integrate_flow(&point("x", "y"), (1.0, 1.0), 1.0, 100).unwrap();
        let e = std::f64::consts::E;
        assert!((x - e).abs() < 1e-8 && (y - e).abs() < 1e-8);
        let (x, y) = integrate_flow(&point("y^2", "x*y"), (0.3, -0.7), 0.0, 5).unwrap();
        assert_eq!((x, y), (0.3, -0.7));
    }

    #[test]
    fn rejects_out_of_jet_variables() {
        assert!(ContinuousField::point(p("y1"), p("0")).is_err());
        assert!(ContinuousField::new(p("y[n]"), p("0"), 1).is_err());
    }
}
