//! Immutable symbolic expressions over exact rationals.
//!
//! Every [`Expr`] is kept in canonical form by its smart constructors:
//! sums and products are flattened and sorted under the total order of
//! [`Node`], rational constants are folded, like terms and like powers are
//! collected, and the identities `0 + e`, `1 * e`, `e ^ 1` are removed.
//! There is no general rational-function gcd cancellation; zero testing is
//! done probabilistically (see [`zero`]).

mod calculus;
pub mod eval;
mod parse;
pub mod poly;
mod render;
pub mod zero;

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use calculus::ZeroRule;
pub use eval::{evaluate, FnBindings, Number, VarAssignment};
pub use parse::{parse, Parser};
pub use zero::{equals_probabilistic, ZeroTest};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A named variable, optionally carrying a lattice offset relative to `n`.
///
/// `x[n+2]` is `Var { name: "x", offset: Some(2) }`; a plain `x` has no offset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    name: Arc<str>,
    offset: Option<i32>,
}

impl Var {
    pub fn plain(name: &str) -> Self {
        Var {
            name: Arc::from(name),
            offset: None,
        }
    }

    pub fn indexed(name: &str, offset: i32) -> Self {
        Var {
            name: Arc::from(name),
            offset: Some(offset),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn offset(&self) -> Option<i32> {
        self.offset
    }

    pub fn shifted(&self, by: i32) -> Var {
        Var {
            name: self.name.clone(),
            offset: self.offset.map(|o| o + by),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.offset {
            None => write!(f, "{}", self.name),
            Some(0) => write!(f, "{}[n]", self.name),
            Some(o) if o > 0 => write!(f, "{}[n+{}]", self.name, o),
            Some(o) => write!(f, "{}[n-{}]", self.name, -o),
        }
    }
}

/// A formal unknown function with a fixed number of argument slots.
///
/// Identity is `(name, arity)`; slot labels are documentation only.
#[derive(Clone, Debug)]
pub struct UnknownFn {
    name: Arc<str>,
    arity: usize,
    labels: Arc<[String]>,
}

impl UnknownFn {
    pub fn new(name: &str, arity: usize) -> Self {
        UnknownFn {
            name: Arc::from(name),
            arity,
            labels: Arc::from(Vec::new()),
        }
    }

    pub fn with_labels(name: &str, labels: &[&str]) -> Self {
        UnknownFn {
            name: Arc::from(name),
            arity: labels.len(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Applies the function, checking arity.
    pub fn call(&self, args: Vec<Expr>) -> Result<Expr> {
        if args.len() != self.arity {
            return Err(Error::Arity {
                name: self.name.to_string(),
                expected: self.arity,
                found: args.len(),
            });
        }
        Ok(Expr::from_node(Node::Apply(self.clone(), args)))
    }

    /// Formal partial derivative with respect to the given (0-based) slots.
    pub fn partial(&self, slots: &[usize], args: Vec<Expr>) -> Result<Expr> {
        let base = self.call(args)?;
        if let Some(&bad) = slots.iter().find(|&&s| s >= self.arity) {
            return Err(Error::Arity {
                name: self.name.to_string(),
                expected: self.arity,
                found: bad + 1,
            });
        }
        let mut slots = slots.to_vec();
        slots.sort_unstable();
        Ok(match base.node() {
            Node::Apply(f, args) if !slots.is_empty() => {
                Expr::from_node(Node::Deriv(f.clone(), slots, args.clone()))
            }
            _ => base,
        })
    }
}

impl PartialEq for UnknownFn {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arity == other.arity
    }
}
impl Eq for UnknownFn {}
impl PartialOrd for UnknownFn {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for UnknownFn {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.name, self.arity).cmp(&(&other.name, other.arity))
    }
}
impl Hash for UnknownFn {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.arity.hash(state);
    }
}

/// Expression node. Variant order is the first key of the canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Var),
    Pow(Expr, Rational),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Apply(UnknownFn, Vec<Expr>),
    /// Formal partial derivative: function, sorted 0-based slot multiset, arguments.
    Deriv(UnknownFn, Vec<usize>, Vec<Expr>),
}

struct Inner {
    node: Node,
    vars: BTreeSet<Var>,
    has_fn: bool,
}

/// Shared, immutable, canonical expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}
impl Eq for Expr {}
impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            std::cmp::Ordering::Equal
        } else {
            self.0.node.cmp(&other.0.node)
        }
    }
}
impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

fn children(node: &Node) -> &[Expr] {
    match node {
        Node::Const(_) | Node::Var(_) => &[],
        Node::Pow(b, _) => std::slice::from_ref(b),
        Node::Mul(xs) | Node::Add(xs) | Node::Apply(_, xs) | Node::Deriv(_, _, xs) => xs,
    }
}

impl Expr {
    /// Wraps a node without canonicalizing it. Callers must pass canonical data.
    fn from_node(node: Node) -> Expr {
        let mut vars = BTreeSet::new();
        let mut has_fn = matches!(node, Node::Apply(..) | Node::Deriv(..));
        if let Node::Var(v) = &node {
            vars.insert(v.clone());
        }
        for c in children(&node) {
            vars.extend(c.0.vars.iter().cloned());
            has_fn |= c.0.has_fn;
        }
        Expr(Arc::new(Inner { node, vars, has_fn }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(r: Rational) -> Expr {
        Expr::from_node(Node::Const(r))
    }

    pub fn integer(n: i64) -> Expr {
        Expr::constant(int(n))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }

    /// Plain (unindexed) variable.
    pub fn sym(name: &str) -> Expr {
        Expr::var(Var::plain(name))
    }

    /// Indexed variable `name[n+offset]`.
    pub fn idx(name: &str, offset: i32) -> Expr {
        Expr::var(Var::indexed(name, offset))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self.node() {
            Node::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Structural zero (canonical form is the constant 0).
    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    pub fn free_vars(&self) -> &BTreeSet<Var> {
        &self.0.vars
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.0.vars.contains(v)
    }

    /// True if any unknown-function application occurs in the expression.
    pub fn has_unknowns(&self) -> bool {
        self.0.has_fn
    }

    pub fn children(&self) -> &[Expr] {
        children(self.node())
    }

    /// Unknown functions referenced anywhere in the expression.
    pub fn functions(&self) -> BTreeSet<UnknownFn> {
        let mut out = BTreeSet::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions(&self, out: &mut BTreeSet<UnknownFn>) {
        if !self.has_unknowns() {
            return;
        }
        match self.node() {
            Node::Apply(f, _) | Node::Deriv(f, _, _) => {
                out.insert(f.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_functions(out);
        }
    }

    /// Node count (shared subtrees counted once per occurrence).
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }

    pub fn add<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        canon::add(terms)
    }

    pub fn mul<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        canon::mul(factors)
    }

    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        canon::pow(base, exponent)
    }

    pub fn powi(&self, n: i64) -> Expr {
        canon::pow(self.clone(), int(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn scale(&self, c: Rational) -> Expr {
        canon::mul([Expr::constant(c), self.clone()])
    }

    /// Rebuilds the expression bottom-up through the canonical constructors.
    pub fn simplify(&self) -> Expr {
        self.rebuild(&mut |_| None)
    }

    /// Bottom-up rebuild; `f` may replace any node before its children are visited.
    pub(crate) fn rebuild(&self, f: &mut dyn FnMut(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Pow(b, e) => canon::pow(b.rebuild(f), e.clone()),
            Node::Mul(xs) => canon::mul(xs.iter().map(|x| x.rebuild(f)).collect::<Vec<_>>()),
            Node::Add(xs) => canon::add(xs.iter().map(|x| x.rebuild(f)).collect::<Vec<_>>()),
            Node::Apply(g, xs) => {
                Expr::from_node(Node::Apply(g.clone(), xs.iter().map(|x| x.rebuild(f)).collect()))
            }
            Node::Deriv(g, s, xs) => Expr::from_node(Node::Deriv(
                g.clone(),
                s.clone(),
                xs.iter().map(|x| x.rebuild(f)).collect(),
            )),
        }
    }

    /// Splits off the rational coefficient of a term: `3*x*y -> (3, x*y)`.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        canon::split_coeff(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::integer(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Expr {
        Expr::constant(r)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| canon::add([a, b]));
binop!(Sub, sub, |a, b| canon::add([a, b.scale(int(-1))]));
binop!(Mul, mul, |a, b| canon::mul([a, b]));
binop!(Div, div, |a, b| canon::mul([a, b.recip()]));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(int(-1))
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(int(-1))
    }
}

pub(crate) fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Exact rational power for integer exponents.
pub(crate) fn rational_powi(base: &Rational, e: &BigInt) -> Option<Rational> {
    let n = e.to_i32()?;
    if base.is_zero() && n < 0 {
        return None;
    }
    Some(num_traits::pow::Pow::pow(base, n))
}

mod canon {
    use std::collections::BTreeMap;

    use super::*;

    pub(super) fn split_coeff(e: &Expr) -> (Rational, Expr) {
        match e.node() {
            Node::Const(c) => (c.clone(), Expr::one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Const(c) => {
                    let rest = &fs[1..];
                    let r = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::from_node(Node::Mul(rest.to_vec()))
                    };
                    (c.clone(), r)
                }
                _ => (Rational::one(), e.clone()),
            },
            _ => (Rational::one(), e.clone()),
        }
    }

    fn with_coeff(c: Rational, rest: Expr) -> Expr {
        if c.is_one() {
            return rest;
        }
        match rest.node() {
            Node::Const(r) => Expr::constant(c * r),
            Node::Mul(fs) => {
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::constant(c));
                v.extend(fs.iter().cloned());
                Expr::from_node(Node::Mul(v))
            }
            _ => Expr::from_node(Node::Mul(vec![Expr::constant(c), rest])),
        }
    }

    pub(super) fn add<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut acc: BTreeMap<Expr, Rational> = BTreeMap::new();
        fn push(e: Expr, constant: &mut Rational, acc: &mut BTreeMap<Expr, Rational>) {
            match e.node() {
                Node::Add(ts) => {
                    for t in ts {
                        push(t.clone(), constant, acc);
                    }
                }
                Node::Const(c) => *constant += c,
                _ => {
                    let (c, r) = split_coeff(&e);
                    *acc.entry(r).or_insert_with(Rational::zero) += c;
                }
            }
        }
        for t in terms {
            push(t, &mut constant, &mut acc);
        }
        let mut out = Vec::with_capacity(acc.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        for (r, c) in acc {
            if !c.is_zero() {
                out.push(with_coeff(c, r));
            }
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Add(out)),
        }
    }

    pub(super) fn mul<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = Rational::one();
        let mut acc: BTreeMap<Expr, Rational> = BTreeMap::new();
        fn push(e: Expr, coeff: &mut Rational, acc: &mut BTreeMap<Expr, Rational>) {
            match e.node() {
                Node::Mul(fs) => {
                    for f in fs {
                        push(f.clone(), coeff, acc);
                    }
                }
                Node::Const(c) => *coeff *= c,
                Node::Pow(b, k) => {
                    *acc.entry(b.clone()).or_insert_with(Rational::zero) += k;
                }
                _ => {
                    *acc.entry(e).or_insert_with(Rational::zero) += Rational::one();
                }
            }
        }
        for f in factors {
            push(f, &mut coeff, &mut acc);
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut out = Vec::with_capacity(acc.len());
        let mut redo = false;
        for (b, k) in acc {
            if k.is_zero() {
                continue;
            }
            let p = pow(b, k);
            match p.node() {
                Node::Const(c) => coeff *= c,
                Node::Mul(_) => {
                    redo = true;
                    out.push(p);
                }
                _ => out.push(p),
            }
        }
        if redo {
            out.push(Expr::constant(coeff));
            return mul(out);
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        out.sort();
        if out.is_empty() {
            return Expr::constant(coeff);
        }
        if out.len() == 1 {
            if coeff.is_one() {
                return out.pop().unwrap();
            }
            if let Node::Add(ts) = out[0].node() {
                return add(ts.iter().map(|t| with_coeff_term(&coeff, t)).collect::<Vec<_>>());
            }
        }
        if !coeff.is_one() {
            out.insert(0, Expr::constant(coeff));
        }
        Expr::from_node(Node::Mul(out))
    }

    fn with_coeff_term(c: &Rational, t: &Expr) -> Expr {
        let (tc, rest) = split_coeff(t);
        with_coeff(c * tc, rest)
    }

    pub(super) fn pow(base: Expr, k: Rational) -> Expr {
        if k.is_zero() {
            return Expr::one();
        }
        if k.is_one() {
            return base;
        }
        let integral = is_integer(&k);
        match base.node() {
            Node::Const(c) => {
                if c.is_one() {
                    return Expr::one();
                }
                if c.is_zero() && k.is_positive() {
                    return Expr::zero();
                }
                if integral {
                    if let Some(v) = rational_powi(c, k.numer()) {
                        return Expr::constant(v);
                    }
                }
                Expr::from_node(Node::Pow(base, k))
            }
            Node::Pow(inner, j) if integral => pow(inner.clone(), j * &k),
            Node::Mul(fs) if integral => {
                mul(fs.iter().map(|f| pow(f.clone(), k.clone())).collect::<Vec<_>>())
            }
            _ => Expr::from_node(Node::Pow(base, k)),
        }
    }
}
