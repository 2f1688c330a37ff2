//! Ordinary difference schemes: two relations `E1 = E2 = 0` on `K` consecutive
//! points that determine both the lattice and the solution.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::eval::eval_f64;
use crate::expr::poly::collect;
use crate::expr::{Expr, Node, Var, ZeroTest};
use crate::prolong::{apply_field, tidy, MultiPointVectorField};
use crate::stencil::{x_var, y_var, Stencil};

#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub name: String,
    /// Number of stencil points `K`; indices run over `n .. n+K-1`.
    pub points: usize,
    pub e1: Expr,
    pub e2: Expr,
    /// The differential equation the scheme approximates, if annotated.
    pub limit: Option<Expr>,
}

impl Scheme {
    /// Builds a scheme, shifting indices so that the lowest point is `n`.
    pub fn new(name: &str, e1: Expr, e2: Expr, limit: Option<Expr>) -> Result<Self> {
        let mut offsets = BTreeSet::new();
        for e in [&e1, &e2] {
            for v in e.free_vars() {
                match (v.name(), v.offset()) {
                    ("x" | "y", Some(j)) => {
                        offsets.insert(j);
                    }
                    _ => {
                        return Err(Error::InvalidScheme(format!(
                            "`{}` is not a stencil coordinate",
                            v
                        )))
                    }
                }
            }
        }
        let (Some(&lo), Some(&hi)) = (offsets.first(), offsets.last()) else {
            return Err(Error::InvalidScheme("the relations mention no points".into()));
        };
        if lo == hi {
            return Err(Error::InvalidScheme("a scheme needs at least two points".into()));
        }
        Ok(Scheme {
            name: name.to_string(),
            points: (hi - lo + 1) as usize,
            e1: e1.shift(-lo),
            e2: e2.shift(-lo),
            limit,
        })
    }

    /// Like [`Scheme::new`] but requires the relations to span exactly `k` points.
    pub fn with_points(name: &str, k: usize, e1: Expr, e2: Expr, limit: Option<Expr>) -> Result<Self> {
        let s = Self::new(name, e1, e2, limit)?;
        if s.points != k {
            return Err(Error::InvalidScheme(format!(
                "declared {} points but the relations span {}",
                k, s.points
            )));
        }
        Ok(s)
    }

    pub fn last(&self) -> i32 {
        self.points as i32 - 1
    }

    fn relations(&self) -> [&Expr; 2] {
        [&self.e1, &self.e2]
    }

    /// Jacobian of `(E1, E2)` with respect to the last point `(x, y)`.
    pub fn jacobian(&self) -> [[Expr; 2]; 2] {
        let (xl, yl) = (x_var(self.last()), y_var(self.last()));
        [
            [self.e1.diff(&xl), self.e1.diff(&yl)],
            [self.e2.diff(&xl), self.e2.diff(&yl)],
        ]
    }
}

fn window_values(points: &[(f64, f64)]) -> BTreeMap<Var, f64> {
    let mut m = BTreeMap::new();
    for (j, (x, y)) in points.iter().enumerate() {
        m.insert(x_var(j as i32), *x);
        m.insert(y_var(j as i32), *y);
    }
    m
}

/// Default threshold on `|det J|` below which the scheme is not solvable for the last point.
pub const DET_TOLERANCE: f64 = 1e-10;

fn det_at(s: &Scheme, vals: &BTreeMap<Var, f64>) -> Result<f64> {
    let j = s.jacobian();
    let e = |e: &Expr| eval_f64(e, vals);
    Ok(e(&j[0][0])? * e(&j[1][1])? - e(&j[0][1])? * e(&j[1][0])?)
}

/// `|det d(E1,E2)/d(x,y)_last| > 1e-10` on the window.
pub fn check_independence(s: &Scheme, window: &Stencil<f64>) -> Result<bool> {
    if window.len() != s.points {
        return Err(Error::InvalidStencil(format!(
            "window has {} points, the scheme {}",
            window.len(),
            s.points
        )));
    }
    let vals = window_values(&window.points);
    match det_at(s, &vals) {
        Ok(d) => Ok(d.abs() > DET_TOLERANCE),
        Err(Error::DivisionByZero) | Err(Error::NonFinite) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Newton iteration settings for [`step_scheme`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Newton {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for Newton {
    fn default() -> Self {
        Newton {
            tolerance: 1e-12,
            max_iterations: 50,
        }
    }
}

/// Solves `E1 = E2 = 0` for the next point given the previous `K-1` points.
pub fn step_scheme(s: &Scheme, known: &[(f64, f64)]) -> Result<(f64, f64)> {
    step_scheme_with(s, known, Newton::default())
}

pub fn step_scheme_with(s: &Scheme, known: &[(f64, f64)], opts: Newton) -> Result<(f64, f64)> {
    if known.len() + 1 != s.points {
        return Err(Error::InvalidStencil(format!(
            "{} known points given, the scheme needs {}",
            known.len(),
            s.points - 1
        )));
    }
    let (xl, yl) = (x_var(s.last()), y_var(s.last()));
    let n = known.len();
    let mut guess = if n >= 2 {
        let (a, b) = (known[n - 2], known[n - 1]);
        (2.0 * b.0 - a.0, 2.0 * b.1 - a.1)
    } else {
        (known[0].0 + 1.0, known[0].1)
    };
    let mut vals = window_values(known);
    let jac = s.jacobian();
    let scale = known
        .iter()
        .fold(1.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_iterations {
        vals.insert(xl.clone(), guess.0);
        vals.insert(yl.clone(), guess.1);
        let r1 = eval_f64(&s.e1, &vals)?;
        let r2 = eval_f64(&s.e2, &vals)?;
        residual = r1.abs().max(r2.abs());
        let a = eval_f64(&jac[0][0], &vals)?;
        let b = eval_f64(&jac[0][1], &vals)?;
        let c = eval_f64(&jac[1][0], &vals)?;
        let d = eval_f64(&jac[1][1], &vals)?;
        let det = a * d - b * c;
        // a singular Jacobian means the point is not determined, even at a root
        if det.abs() <= DET_TOLERANCE {
            return Err(Error::SingularJacobian { det });
        }
        if residual <= opts.tolerance * scale.max(guess.0.abs()).max(guess.1.abs()) {
            return Ok(guess);
        }
        let dx = (d * r1 - b * r2) / det;
        let dy = (a * r2 - c * r1) / det;
        guess = (guess.0 - dx, guess.1 - dy);
        if !guess.0.is_finite() || !guess.1.is_finite() {
            break;
        }
    }
    Err(Error::NewtonDivergence {
        iterations: opts.max_iterations,
        residual,
    })
}

/// A solution of a scheme generated from `K-1` initial points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub scheme: String,
    pub initial: Vec<(f64, f64)>,
    pub points: Vec<(f64, f64)>,
}

pub fn trajectory(s: &Scheme, initial: &[(f64, f64)], steps: usize) -> Result<Trajectory> {
    trajectory_with(s, initial, steps, Newton::default())
}

pub fn trajectory_with(
    s: &Scheme,
    initial: &[(f64, f64)],
    steps: usize,
    opts: Newton,
) -> Result<Trajectory> {
    let mut points = initial.to_vec();
    for _ in 0..steps {
        let known = &points[points.len() + 1 - s.points..];
        let next = step_scheme_with(s, known, opts)?;
        points.push(next);
    }
    Ok(Trajectory {
        scheme: s.name.clone(),
        initial: initial.to_vec(),
        points,
    })
}

impl Trajectory {
    /// Largest `|E1|, |E2|` over all consecutive windows.
    pub fn max_residual(&self, s: &Scheme) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in self.points.windows(s.points) {
            let vals = window_values(w);
            for e in s.relations() {
                worst = worst.max(eval_f64(e, &vals)?.abs());
            }
        }
        Ok(worst)
    }
}

/// Random admissible window: increasing initial abscissae, last point solved for.
pub fn random_window(s: &Scheme, rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64)>> {
    let mut last_err = Error::Manifold("no admissible window found".into());
    for _ in 0..20 {
        let mut x = rng.gen_range(-1.0..1.0);
        let mut known = Vec::with_capacity(s.points - 1);
        for _ in 0..s.points - 1 {
            known.push((x, rng.gen_range(-1.0..1.0)));
            x += rng.gen_range(0.5..1.5);
        }
        match step_scheme(s, &known) {
            Ok(p) => {
                known.push(p);
                return Ok(known);
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// `pr X E_a` restricted to the solution manifold.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldResidual {
    /// The last point was eliminated exactly (relations affine in it).
    Symbolic { residuals: [Expr; 2] },
    /// Largest absolute residuals over random solution windows.
    Numeric { max: [f64; 2], windows: usize },
}

impl ManifoldResidual {
    pub fn vanishes(&self, zt: &ZeroTest, tolerance: f64) -> Result<bool> {
        match self {
            ManifoldResidual::Symbolic { residuals } => {
                Ok(zt.is_zero(&residuals[0])? && zt.is_zero(&residuals[1])?)
            }
            ManifoldResidual::Numeric { max, .. } => Ok(max[0] <= tolerance && max[1] <= tolerance),
        }
    }
}

/// Number of random windows used when the manifold cannot be eliminated symbolically.
pub const NUMERIC_WINDOWS: usize = 50;
pub const NUMERIC_TOLERANCE: f64 = 1e-8;

/// Exact solution of the relations for the last point when they are affine in it.
pub fn eliminate_last_point(s: &Scheme) -> Option<BTreeMap<Var, Expr>> {
    let (xl, yl) = (x_var(s.last()), y_var(s.last()));
    let jac = s.jacobian();
    for row in &jac {
        for e in row {
            if e.contains_var(&xl) || e.contains_var(&yl) {
                return None;
            }
        }
    }
    let mut origin = BTreeMap::new();
    origin.insert(xl.clone(), Expr::zero());
    origin.insert(yl.clone(), Expr::zero());
    let c1 = s.e1.substitute(&origin);
    let c2 = s.e2.substitute(&origin);
    let [[a, b], [c, d]] = jac;
    let det = &a * &d - &b * &c;
    if ZeroTest::default().is_zero(&det).unwrap_or(true) {
        return None;
    }
    // J (x, y) + (c1, c2) = 0
    let x = tidy(&((&b * &c2 - &d * &c1) / &det));
    let y = tidy(&((&c * &c1 - &a * &c2) / &det));
    let mut m = BTreeMap::new();
    m.insert(xl, x);
    m.insert(yl, y);
    Some(m)
}

/// Determining equations before splitting: `pr X E_a` on `E1 = E2 = 0`.
pub fn invariance_residual(
    f: &MultiPointVectorField,
    s: &Scheme,
    rng: &mut ChaCha8Rng,
) -> Result<ManifoldResidual> {
    f.validate()?;
    let act = [apply_field(f, &s.e1), apply_field(f, &s.e2)];
    if let Some(sol) = eliminate_last_point(s) {
        let r = [tidy(&act[0].substitute(&sol)), tidy(&act[1].substitute(&sol))];
        return Ok(ManifoldResidual::Symbolic { residuals: r });
    }
    if f.xi.has_unknowns() || f.phi.has_unknowns() {
        return Err(Error::Manifold(
            "relations are not affine in the last point and the field is not concrete".into(),
        ));
    }
    if f.order > 0 {
        return Err(Error::Manifold(
            "numeric restriction needs a point field when the relations are nonlinear".into(),
        ));
    }
    let mut max = [0.0f64; 2];
    for _ in 0..NUMERIC_WINDOWS {
        let w = random_window(s, rng)?;
        let vals = window_values(&w);
        for (m, a) in max.iter_mut().zip(&act) {
            *m = m.max(eval_f64(a, &vals)?.abs());
        }
    }
    Ok(ManifoldResidual::Numeric {
        max,
        windows: NUMERIC_WINDOWS,
    })
}

/// Splits a restricted residual into the coefficients of its monomials in the
/// free stencil coordinates. Coordinates that occur inside unknown-function
/// arguments are treated as parameters of the coefficients.
pub fn split_determining(residual: &Expr, s: &Scheme) -> Result<Vec<Expr>> {
    let zt = ZeroTest::default();
    if zt.is_zero(residual)? {
        return Ok(vec![]);
    }
    let mut inside = BTreeSet::new();
    collect_function_args(residual, &mut inside);
    let split: BTreeSet<Var> = residual
        .free_vars()
        .iter()
        .filter(|v| matches!(v.name(), "x" | "y") && v.offset().is_some() && !inside.contains(*v))
        .cloned()
        .collect();
    let _ = s;
    let coeffs = collect(residual, &split)?;
    let mut out = Vec::new();
    for c in coeffs.into_values() {
        let c = tidy(&c);
        if !zt.is_zero(&c)? {
            out.push(c);
        }
    }
    Ok(out)
}

fn collect_function_args(e: &Expr, out: &mut BTreeSet<Var>) {
    match e.node() {
        Node::Apply(_, args) | Node::Deriv(_, _, args) => {
            for a in args {
                out.extend(a.free_vars().iter().cloned());
            }
        }
        _ => {
            if e.has_unknowns() {
                for c in e.children() {
                    collect_function_args(c, out);
                }
            }
        }
    }
}
