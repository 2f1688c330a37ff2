//! Stencil coordinates: spacings `h[n+k]` and discrete derivatives `p{k}[n+k]`.
//!
//! On a stencil of `K` points the chart is
//! `(x[n], y[n], h[n+1..n+K-1], p1[n+1], p2[n+2], ..., p{K-1}[n+K-1])` with
//!
//! ```text
//! h[n+k]  = x[n+k] - x[n+k-1]
//! p1[n+1] = (y[n+1] - y[n]) / (x[n+1] - x[n])
//! p{k}    = k * (p{k-1} at n+k  -  p{k-1} at n+k-1) / (x[n+k] - x[n])
//! ```
//!
//! so `p{k}` is `k!` times the divided difference over the first `k+1`
//! points. The inverse map is the Newton interpolation form.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};

/// Number type for stencils and charts: exact rationals or `f64`.
pub trait Scalar: Clone + Debug + Num + PartialOrd + FromPrimitive {}
impl<T: Clone + Debug + Num + PartialOrd + FromPrimitive> Scalar for T {}

fn from_usize<T: Scalar>(k: usize) -> T {
    T::from_usize(k).expect("small integer")
}

/// `K` consecutive lattice points `(x[n+k], y[n+k])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stencil<T> {
    pub points: Vec<(T, T)>,
}

/// Chart coordinates of a stencil. `h[k-1]` is `h[n+k]`, `p[k-1]` is `p{k}[n+k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StencilChart<T> {
    pub x0: T,
    pub y0: T,
    pub h: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Scalar> Stencil<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        let s = Stencil { points };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::InvalidStencil("at least two points are required".into()));
        }
        for w in self.points.windows(2) {
            if w[1].0 == w[0].0 {
                return Err(Error::InvalidStencil("coincident x values".into()));
            }
            if w[1].0 < w[0].0 {
                return Err(Error::InvalidStencil("x must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Table `d[k][j]` of `p{k}` at index `n+j`, for `1 <= k <= j < K`.
    pub fn derivative_table(&self) -> Result<Vec<Vec<Option<T>>>> {
        self.validate()?;
        let k_pts = self.points.len();
        let x = |j: usize| self.points[j].0.clone();
        let mut d: Vec<Vec<Option<T>>> = vec![vec![None; k_pts]; k_pts];
        for j in 1..k_pts {
            let dy = self.points[j].1.clone() - self.points[j - 1].1.clone();
            d[1][j] = Some(dy / (x(j) - x(j - 1)));
        }
        for k in 2..k_pts {
            for j in k..k_pts {
                let a = d[k - 1][j].clone().unwrap();
                let b = d[k - 1][j - 1].clone().unwrap();
                d[k][j] = Some(from_usize::<T>(k) * (a - b) / (x(j) - x(j - k)));
            }
        }
        Ok(d)
    }

    pub fn to_chart(&self) -> Result<StencilChart<T>> {
        let d = self.derivative_table()?;
        let k_pts = self.points.len();
        Ok(StencilChart {
            x0: self.points[0].0.clone(),
            y0: self.points[0].1.clone(),
            h: (1..k_pts)
                .map(|k| self.points[k].0.clone() - self.points[k - 1].0.clone())
                .collect(),
            p: (1..k_pts).map(|k| d[k][k].clone().unwrap()).collect(),
        })
    }
}

impl<T: Scalar> StencilChart<T> {
    /// Number of stencil points described by the chart.
    pub fn points(&self) -> usize {
        self.h.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_empty() || self.h.len() != self.p.len() {
            return Err(Error::InvalidStencil(
                "a chart needs matching, non-empty h and p lists".into(),
            ));
        }
        if self.h.iter().any(|h| *h <= T::zero()) {
            return Err(Error::InvalidStencil("spacings must be positive".into()));
        }
        Ok(())
    }

    pub fn from_chart(&self) -> Result<Stencil<T>> {
        self.validate()?;
        let mut xs = vec![self.x0.clone()];
        for h in &self.h {
            let last = xs.last().unwrap().clone();
            xs.push(last + h.clone());
        }
        // Newton form with coefficients p{k}/k!
        let mut coef = Vec::with_capacity(self.p.len());
        let mut fact = T::one();
        for (i, p) in self.p.iter().enumerate() {
            fact = fact * from_usize::<T>(i + 1);
            coef.push(p.clone() / fact.clone());
        }
        let points = xs
            .iter()
            .enumerate()
            .map(|(j, xj)| {
                let mut acc = T::zero();
                for k in (1..=j).rev() {
                    acc = (acc + coef[k - 1].clone()) * (xj.clone() - xs[k - 1].clone());
                }
                (xj.clone(), self.y0.clone() + acc)
            })
            .collect();
        Ok(Stencil { points })
    }
}

/// Chart variable `h[n+k]`.
pub fn h_var(k: i32) -> Var {
    Var::indexed("h", k)
}

/// Chart variable `p{k}[n+k]`.
pub fn p_var(k: usize) -> Var {
    Var::indexed(&format!("p{}", k), k as i32)
}

pub fn x_var(j: i32) -> Var {
    Var::indexed("x", j)
}

pub fn y_var(j: i32) -> Var {
    Var::indexed("y", j)
}

/// All chart variables of a `K`-point stencil in display order.
pub fn chart_vars(k_points: usize) -> Vec<Var> {
    let mut v = vec![x_var(0), y_var(0)];
    v.extend((1..k_points).map(p_var));
    v.extend((1..k_points as i32).map(h_var));
    v
}

/// Bindings `x[n+j], y[n+j] -> chart expression` for `j = 1..K-1`.
///
/// For `K = 3` the `y[n+2]` binding reads
/// `y[n] + (h[n+1] + h[n+2])*(p1[n+1] + h[n+2]*p2[n+2]/2)`.
pub fn symbolic_chart_substitution(k_points: usize) -> BTreeMap<Var, Expr> {
    assert!(k_points >= 2, "a stencil has at least two points");
    let mut map = BTreeMap::new();
    // distance x[n+j] - x[n+i] as a sum of spacings
    let dist = |j: usize, i: usize| -> Expr {
        Expr::add(((i + 1)..=j).map(|m| Expr::var(h_var(m as i32))).collect::<Vec<_>>())
    };
    let mut fact = 1i64;
    let facts: Vec<i64> = (0..k_points)
        .map(|k| {
            if k > 0 {
                fact *= k as i64;
            }
            fact
        })
        .collect();
    for j in 1..k_points {
        map.insert(x_var(j as i32), Expr::var(x_var(0)) + dist(j, 0));
        let mut inner = Expr::zero();
        for k in (1..=j).rev() {
            let c = Expr::var(p_var(k)) / Expr::integer(facts[k]);
            inner = if k == j {
                c
            } else {
                c + dist(j, k) * inner
            };
        }
        map.insert(y_var(j as i32), Expr::var(y_var(0)) + dist(j, 0) * inner);
    }
    map
}

/// `p{k}` at index `n+j` written in point coordinates (points `n+j-k .. n+j`).
pub fn discrete_derivative_expr(k: usize, j: i32) -> Expr {
    assert!(k >= 1);
    if k == 1 {
        return (Expr::var(y_var(j)) - Expr::var(y_var(j - 1)))
            / (Expr::var(x_var(j)) - Expr::var(x_var(j - 1)));
    }
    let a = discrete_derivative_expr(k - 1, j);
    let b = discrete_derivative_expr(k - 1, j - 1);
    Expr::integer(k as i64) * (a - b) / (Expr::var(x_var(j)) - Expr::var(x_var(j - k as i32)))
}

/// Inverse bindings: chart variables of a `K`-point stencil in point coordinates.
pub fn chart_to_points(k_points: usize) -> BTreeMap<Var, Expr> {
    let mut map = BTreeMap::new();
    for k in 1..k_points {
        map.insert(
            h_var(k as i32),
            Expr::var(x_var(k as i32)) - Expr::var(x_var(k as i32 - 1)),
        );
        map.insert(p_var(k), discrete_derivative_expr(k, k as i32));
    }
    map
}

/// Observed behaviour of an approximation as the spacing shrinks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Convergence {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log|error|` against `log h`; `None` when exact.
    pub order: Option<f64>,
    pub exact: bool,
}

impl Convergence {
    /// Exact results count as converging at any order.
    pub fn at_least(&self, order: f64) -> bool {
        self.exact || self.order.is_some_and(|o| o >= order)
    }
}

/// Relative error below which an approximation is reported as exact.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Measures how `family(h)` approaches `target` along a decreasing `h_list`.
pub fn continuous_limit_probe(
    family: impl Fn(f64) -> Result<f64>,
    target: f64,
    h_list: &[f64],
) -> Result<Convergence> {
    if h_list.len() < 3 {
        return Err(Error::Probe("at least three spacings are required".into()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) || h_list.iter().any(|h| *h <= 0.0) {
        return Err(Error::Probe("spacings must be positive and strictly decreasing".into()));
    }
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let v = family(h)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        errors.push((v - target).abs());
    }
    let scale = target.abs().max(1.0);
    if errors.iter().all(|e| *e <= EXACT_TOLERANCE * scale) {
        return Ok(Convergence {
            h: h_list.to_vec(),
            errors,
            order: None,
            exact: true,
        });
    }
    let floor = f64::MIN_POSITIVE;
    let lx: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.max(floor).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(Convergence {
        h: h_list.to_vec(),
        errors,
        order: Some(sxy / sxx),
        exact: false,
    })
}

/// Uniform stencil of `k_points` samples of `f` starting at `x0`.
pub fn sample_uniform(f: impl Fn(f64) -> f64, x0: f64, h: f64, k_points: usize) -> Stencil<f64> {
    Stencil {
        points: (0..k_points)
            .map(|j| {
                let x = x0 + h * j as f64;
                (x, f(x))
            })
            .collect(),
    }
}
