//! Numeric evaluation, exact (rational) or floating.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{is_integer, rational_powi, Expr, Node, Rational, UnknownFn, Var};
use crate::error::{Error, Result};

/// Number type an expression can be evaluated in.
pub trait Scalar: Clone + fmt::Debug {
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn recip(&self) -> Result<Self>;
    fn pow(&self, k: &Rational) -> Result<Self>;
    fn check(self) -> Result<Self> {
        Ok(self)
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(BigRational::recip(self))
        }
    }
    fn pow(&self, k: &Rational) -> Result<Self> {
        if is_integer(k) {
            return rational_powi(self, k.numer()).ok_or(Error::DivisionByZero);
        }
        Err(Error::Inexact(format!("({})^({})", self, k)))
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(1.0 / self)
        }
    }
    fn pow(&self, k: &Rational) -> Result<Self> {
        if is_integer(k) {
            if let Some(n) = k.numer().to_i32() {
                if *self == 0.0 && n < 0 {
                    return Err(Error::DivisionByZero);
                }
                return Ok(self.powi(n));
            }
        }
        Ok(self.powf(f64::from_rational(k)))
    }
    fn check(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// Evaluates expressions in `S`, memoizing shared subtrees.
pub struct Evaluator<'a, S: Scalar> {
    vars: &'a dyn Fn(&Var) -> Option<S>,
    funcs: &'a mut dyn FnMut(&UnknownFn, &[usize], &[S]) -> Result<S>,
    memo: HashMap<*const (), (Expr, S)>,
}

impl<'a, S: Scalar> Evaluator<'a, S> {
    pub fn new(
        vars: &'a dyn Fn(&Var) -> Option<S>,
        funcs: &'a mut dyn FnMut(&UnknownFn, &[usize], &[S]) -> Result<S>,
    ) -> Self {
        Evaluator {
            vars,
            funcs,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<S> {
        let key = Arc::as_ptr(&e.0) as *const ();
        if let Some((_, v)) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = match e.node() {
            Node::Const(c) => S::from_rational(c),
            Node::Var(v) => (self.vars)(v).ok_or_else(|| Error::Unbound(v.to_string()))?,
            Node::Add(ts) => {
                let mut acc = S::zero();
                for t in ts {
                    acc = acc.add(&self.eval(t)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = S::one();
                for f in fs {
                    acc = acc.mul(&self.eval(f)?);
                }
                acc
            }
            Node::Pow(b, k) => {
                let b = self.eval(b)?;
                if *k == -<Rational as One>::one() {
                    b.recip()?
                } else {
                    b.pow(k)?
                }
            }
            Node::Apply(f, args) | Node::Deriv(f, _, args) => {
                let slots: &[usize] = match e.node() {
                    Node::Deriv(_, s, _) => s,
                    _ => &[],
                };
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                (self.funcs)(f, slots, &vals)?
            }
        }
        .check()?;
        self.memo.insert(key, (e.clone(), v.clone()));
        Ok(v)
    }
}

/// Exact evaluation with no unknown functions.
pub fn eval_rational(e: &Expr, vars: &BTreeMap<Var, Rational>) -> Result<Rational> {
    let lookup = |v: &Var| vars.get(v).cloned();
    let mut funcs = |f: &UnknownFn, _: &[usize], _: &[Rational]| -> Result<Rational> {
        Err(Error::UnboundFunction(f.name().to_string()))
    };
    Evaluator::new(&lookup, &mut funcs).eval(e)
}

/// Floating evaluation with no unknown functions.
pub fn eval_f64(e: &Expr, vars: &BTreeMap<Var, f64>) -> Result<f64> {
    let lookup = |v: &Var| vars.get(v).copied();
    let mut funcs = |f: &UnknownFn, _: &[usize], _: &[f64]| -> Result<f64> {
        Err(Error::UnboundFunction(f.name().to_string()))
    };
    Evaluator::new(&lookup, &mut funcs).eval(e)
}

/// A value bound to a variable, or the result of an evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => f64::from_rational(r),
            Number::Float(x) => *x,
        }
    }
}

impl From<Rational> for Number {
    fn from(r: Rational) -> Self {
        Number::Exact(r)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{}", r),
            Number::Float(x) => write!(f, "{}", x),
        }
    }
}

/// Variable bindings for [`evaluate`].
#[derive(Clone, Debug, Default)]
pub struct VarAssignment {
    values: BTreeMap<Var, Number>,
}

impl VarAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, n: impl Into<Number>) -> &mut Self {
        self.values.insert(v, n.into());
        self
    }

    pub fn with(mut self, v: Var, n: impl Into<Number>) -> Self {
        self.set(v, n);
        self
    }

    pub fn get(&self, v: &Var) -> Option<&Number> {
        self.values.get(v)
    }

    fn all_exact(&self) -> bool {
        self.values.values().all(|n| matches!(n, Number::Exact(_)))
    }
}

type Closure = Box<dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync>;

/// Concrete closures standing in for unknown functions during floating evaluation.
///
/// A closure receives the formal-partial slot list (empty for the function
/// value) and the argument values.
#[derive(Default)]
pub struct FnBindings {
    closures: BTreeMap<String, Closure>,
}

impl FnBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(
        mut self,
        name: &str,
        f: impl Fn(&[usize], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.closures.insert(name.to_string(), Box::new(f));
        self
    }
}

/// Evaluates `e` under `a`.
///
/// The result is exact when every binding is exact and no unknown function
/// occurs; otherwise it is computed in floating point using `fns`.
pub fn evaluate(e: &Expr, a: &VarAssignment, fns: &FnBindings) -> Result<Number> {
    if a.all_exact() && !e.has_unknowns() {
        let vars: BTreeMap<Var, Rational> = a
            .values
            .iter()
            .map(|(k, v)| match v {
                Number::Exact(r) => (k.clone(), r.clone()),
                Number::Float(_) => unreachable!(),
            })
            .collect();
        match eval_rational(e, &vars) {
            Ok(r) => return Ok(Number::Exact(r)),
            Err(Error::Inexact(_)) => {}
            Err(err) => return Err(err),
        }
    }
    let lookup = |v: &Var| a.values.get(v).map(Number::to_f64);
    let mut funcs = |f: &UnknownFn, slots: &[usize], args: &[f64]| -> Result<f64> {
        let c = fns
            .closures
            .get(f.name())
            .ok_or_else(|| Error::UnboundFunction(f.name().to_string()))?;
        Ok(c(slots, args))
    };
    Evaluator::new(&lookup, &mut funcs)
        .eval(e)
        .map(Number::Float)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, parse, rat};

    #[test]
    fn slope_of_parabola_points() {
        let e = parse("(y[n+1]-y[n])/(x[n+1]-x[n])").unwrap();
        let a = VarAssignment::new()
            .with(Var::indexed("x", 0), int(0))
            .with(Var::indexed("y", 0), int(0))
            .with(Var::indexed("x", 1), int(1))
            .with(Var::indexed("y", 1), int(1));
        assert_eq!(evaluate(&e, &a, &FnBindings::new()).unwrap(), Number::Exact(int(1)));
    }

    #[test]
    fn errors() {
        let e = parse("1/(x - 1)").unwrap();
        let a = VarAssignment::new().with(Var::plain("x"), int(1));
        assert_eq!(evaluate(&e, &a, &FnBindings::new()), Err(Error::DivisionByZero));
        let a = VarAssignment::new();
        assert!(matches!(evaluate(&e, &a, &FnBindings::new()), Err(Error::Unbound(_))));
    }

    #[test]
    fn closures_bind_unknown_functions() {
        let e = parse("f(x) + D[1](f)(x)").unwrap();
        let fns = FnBindings::new().bind("f", |slots, a| match slots.len() {
            0 => a[0] * a[0],
            1 => 2.0 * a[0],
            _ => 2.0,
        });
        let a = VarAssignment::new().with(Var::plain("x"), rat(3, 1));
        assert_eq!(evaluate(&e, &a, &fns).unwrap(), Number::Float(15.0));
    }

    #[test]
    fn irrational_powers_fall_back_to_float() {
        let e = parse("x^(1/2)").unwrap();
        let a = VarAssignment::new().with(Var::plain("x"), int(2));
        match evaluate(&e, &a, &FnBindings::new()).unwrap() {
            Number::Float(v) => assert!((v - 2f64.sqrt()).abs() < 1e-15),
            other => panic!("{:?}", other),
        }
    }
}
