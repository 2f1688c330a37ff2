//! Polynomial views of expressions: expansion, quotient normal form,
//! coefficient collection and common-factor extraction.
//!
//! Anything that is not a constant, sum, product or positive integer power
//! is an *atom* (variables, unknown-function applications, negative or
//! fractional powers). Denominators are kept as products of sign- and
//! leading-coefficient-normalized factors; the numerator is cancelled only
//! against those known factors by exact division.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{int, is_integer, Expr, Node, Rational, Var};
use crate::error::{Error, Result};

type Mono = BTreeMap<Expr, u32>;

/// Upper bound on the number of terms any intermediate polynomial may reach.
pub const TERM_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

fn mono_cmp(a: &Mono, b: &Mono) -> Ordering {
    // lex order: atoms ascending, a larger exponent on the first differing atom wins
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some((ka, ea)), Some((kb, eb))) => match ka.cmp(kb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    ia.next();
                    ib.next();
                }
            },
        }
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out = a.clone();
    for (k, e) in b {
        *out.entry(k.clone()).or_insert(0) += e;
    }
    out
}

fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out = a.clone();
    for (k, e) in b {
        let have = out.get_mut(k)?;
        if *have < *e {
            return None;
        }
        *have -= e;
        if *have == 0 {
            out.remove(k);
        }
    }
    Some(out)
}

impl Poly {
    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(Mono::new(), c);
        }
        p
    }

    fn atom(e: Expr) -> Self {
        let mut m = Mono::new();
        m.insert(e, 1);
        let mut p = Poly::default();
        p.terms.insert(m, Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Result<Poly> {
        if self.len().saturating_mul(o.len()) > TERM_LIMIT * 4 {
            return Err(Error::Inexact("polynomial too large".into()));
        }
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        if out.len() > TERM_LIMIT {
            return Err(Error::Inexact("polynomial too large".into()));
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Poly> {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().max_by(|a, b| mono_cmp(a.0, b.0))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut r = self.clone();
        let mut q = Poly::default();
        let mut steps = 0usize;
        while let Some((rm, rc)) = r.leading() {
            steps += 1;
            if steps > TERM_LIMIT {
                return None;
            }
            let tm = mono_div(rm, &lm)?;
            let tc = rc / &lc;
            let mut t = Poly::default();
            t.terms.insert(tm, tc);
            r = r.add(&t.mul(d).ok()?.scale(&int(-1)));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Expands `e` into a polynomial over its atoms.
    pub fn from_expr(e: &Expr) -> Result<Poly> {
        match e.node() {
            Node::Const(c) => Ok(Poly::constant(c.clone())),
            Node::Add(ts) => {
                let mut out = Poly::default();
                for t in ts {
                    out = out.add(&Poly::from_expr(t)?);
                }
                Ok(out)
            }
            Node::Mul(fs) => {
                let mut out = Poly::constant(Rational::one());
                for f in fs {
                    out = out.mul(&Poly::from_expr(f)?)?;
                }
                Ok(out)
            }
            Node::Pow(b, k) if is_integer(k) && k.is_positive() => {
                let n = k.to_u32().ok_or_else(|| Error::Inexact("exponent".into()))?;
                Poly::from_expr(b)?.pow(n)
            }
            _ => Ok(Poly::atom(e.clone())),
        }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::add(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let mut fs = vec![Expr::constant(c.clone())];
                    fs.extend(m.iter().map(|(a, k)| a.powi(*k as i64)));
                    Expr::mul(fs)
                })
                .collect::<Vec<_>>(),
        )
    }
}

/// Distributes products over sums and expands positive integer powers of sums.
///
/// Falls back to the canonical form when the expansion would exceed
/// [`TERM_LIMIT`] terms.
pub fn expand(e: &Expr) -> Expr {
    match Poly::from_expr(e) {
        Ok(p) => p.to_expr(),
        Err(_) => e.clone(),
    }
}

/// A quotient `num / Π den_i^k_i` with normalized denominator factors.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub num: Poly,
    pub den: BTreeMap<Expr, u32>,
}

impl Fraction {
    fn from_poly(p: Poly) -> Self {
        Fraction {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        let mut fs = vec![self.num.to_expr()];
        fs.extend(self.den.iter().map(|(b, k)| b.powi(-(*k as i64))));
        Expr::mul(fs)
    }

    fn mul(&self, o: &Fraction) -> Result<Fraction> {
        let mut den = self.den.clone();
        for (b, k) in &o.den {
            *den.entry(b.clone()).or_insert(0) += k;
        }
        Ok(Fraction {
            num: self.num.mul(&o.num)?,
            den,
        })
    }

    /// Adds a denominator factor `p^k`, normalizing sign and leading coefficient.
    fn divide_by(&mut self, p: &Poly, k: u32) -> Result<()> {
        let Some((_, lc)) = p.leading() else {
            return Err(Error::DivisionByZero);
        };
        let lc = lc.clone();
        let monic = p.scale(&lc.recip());
        let scale = num_traits::pow::Pow::pow(&lc, k);
        self.num = self.num.scale(&scale.recip());
        if monic.len() == 1 && monic.terms.keys().next().unwrap().is_empty() {
            return Ok(());
        }
        // monomial denominators are stored atom by atom
        if monic.len() == 1 {
            let m = monic.terms.keys().next().unwrap().clone();
            for (a, e) in m {
                *self.den.entry(a).or_insert(0) += e * k;
            }
            return Ok(());
        }
        *self.den.entry(monic.to_expr()).or_insert(0) += k;
        Ok(())
    }

    fn cancel(&mut self) {
        let bases: Vec<(Expr, u32)> = self.den.iter().map(|(b, k)| (b.clone(), *k)).collect();
        for (b, k) in bases {
            let Ok(bp) = Poly::from_expr(&b) else { continue };
            let mut left = k;
            while left > 0 {
                match self.num.exact_div(&bp) {
                    Some(q) => {
                        self.num = q;
                        left -= 1;
                    }
                    None => break,
                }
            }
            if left == 0 {
                self.den.remove(&b);
            } else {
                self.den.insert(b, left);
            }
        }
        if self.num.is_zero() {
            self.den.clear();
        }
    }
}

/// Brings `e` over a common denominator.
pub fn together(e: &Expr) -> Result<Fraction> {
    match e.node() {
        Node::Const(_) | Node::Var(_) | Node::Apply(..) | Node::Deriv(..) => {
            Ok(Fraction::from_poly(Poly::from_expr(e)?))
        }
        Node::Mul(fs) => {
            let mut acc = Fraction::from_poly(Poly::constant(Rational::one()));
            for f in fs {
                acc = acc.mul(&together(f)?)?;
            }
            Ok(acc)
        }
        Node::Add(ts) => {
            let parts: Vec<Fraction> = ts.iter().map(together).collect::<Result<_>>()?;
            let mut lcm: BTreeMap<Expr, u32> = BTreeMap::new();
            for p in &parts {
                for (b, k) in &p.den {
                    let e = lcm.entry(b.clone()).or_insert(0);
                    *e = (*e).max(*k);
                }
            }
            let mut num = Poly::default();
            for p in parts {
                let mut t = p.num;
                for (b, k) in &lcm {
                    let missing = k - p.den.get(b).copied().unwrap_or(0);
                    if missing > 0 {
                        t = t.mul(&Poly::from_expr(b)?.pow(missing)?)?;
                    }
                }
                num = num.add(&t);
                if num.len() > TERM_LIMIT {
                    return Err(Error::Inexact("polynomial too large".into()));
                }
            }
            Ok(Fraction { num, den: lcm })
        }
        Node::Pow(b, k) if is_integer(k) => {
            let n = k
                .numer()
                .abs()
                .to_u32()
                .ok_or_else(|| Error::Inexact("exponent".into()))?;
            let f = together(b)?;
            if k.is_positive() {
                let mut den = f.den.clone();
                den.values_mut().for_each(|v| *v *= n);
                Ok(Fraction {
                    num: f.num.pow(n)?,
                    den,
                })
            } else {
                let mut num = Poly::constant(Rational::one());
                for (base, kb) in &f.den {
                    num = num.mul(&Poly::from_expr(base)?.pow(kb * n)?)?;
                }
                let mut out = Fraction::from_poly(num);
                out.divide_by(&f.num, n)?;
                Ok(out)
            }
        }
        Node::Pow(_, k) => {
            // fractional power: an atom, or the reciprocal of one
            if k.is_negative() {
                let Node::Pow(b, k) = e.node() else { unreachable!() };
                let atom = Expr::pow(b.clone(), -k);
                let mut out = Fraction::from_poly(Poly::constant(Rational::one()));
                out.den.insert(atom, 1);
                Ok(out)
            } else {
                Ok(Fraction::from_poly(Poly::atom(e.clone())))
            }
        }
    }
}

/// Quotient normal form: common denominator, expanded numerator, cancellation
/// against the denominator factors. Falls back to `e` when expansion is too large.
pub fn normal_form(e: &Expr) -> Expr {
    match together(e) {
        Ok(mut f) => {
            f.cancel();
            f.to_expr()
        }
        Err(_) => e.clone(),
    }
}

/// Numerator of the quotient normal form (the expression vanishes iff it does,
/// away from the zero set of the denominator).
pub fn numerator(e: &Expr) -> Result<Expr> {
    let mut f = together(e)?;
    f.cancel();
    Ok(f.num.to_expr())
}

/// Coefficients of `e` as a polynomial in `vars`, keyed by monomial.
///
/// Fails with [`Error::NonPolynomial`] when one of `vars` occurs inside an
/// atom (an unknown-function argument, a fractional power, a denominator).
pub fn collect(e: &Expr, vars: &BTreeSet<Var>) -> Result<BTreeMap<BTreeMap<Var, u32>, Expr>> {
    let f = together(e)?;
    for b in f.den.keys() {
        if let Some(v) = b.free_vars().intersection(vars).next() {
            return Err(Error::NonPolynomial { var: v.to_string() });
        }
    }
    let mut out: BTreeMap<BTreeMap<Var, u32>, Vec<Expr>> = BTreeMap::new();
    for (m, c) in &f.num.terms {
        let mut key = BTreeMap::new();
        let mut rest = vec![Expr::constant(c.clone())];
        for (a, k) in m {
            match a.node() {
                Node::Var(v) if vars.contains(v) => {
                    key.insert(v.clone(), *k);
                }
                _ => {
                    if let Some(v) = a.free_vars().intersection(vars).next() {
                        return Err(Error::NonPolynomial { var: v.to_string() });
                    }
                    rest.push(a.powi(*k as i64));
                }
            }
        }
        out.entry(key).or_default().push(Expr::mul(rest));
    }
    let den = Fraction {
        num: Poly::constant(Rational::one()),
        den: f.den.clone(),
    }
    .to_expr();
    Ok(out
        .into_iter()
        .map(|(k, v)| (k, Expr::add(v) * &den))
        .filter(|(_, v)| !v.is_zero())
        .collect())
}

/// Pulls the factors common to every term out of a sum: `e = prefactor * core`.
///
/// Only bases whose exponents agree in sign across all terms are extracted;
/// the rational content is normalized so that the first term of `core` has
/// coefficient of magnitude one.
pub fn factor_terms(e: &Expr) -> (Expr, Expr) {
    let Node::Add(ts) = e.node() else {
        return (Expr::one(), e.clone());
    };
    let split = |t: &Expr| -> (Rational, BTreeMap<Expr, Rational>) {
        let (c, rest) = t.split_coefficient();
        let mut m = BTreeMap::new();
        let fs: Vec<Expr> = match rest.node() {
            Node::Mul(fs) => fs.clone(),
            Node::Const(_) => vec![],
            _ => vec![rest.clone()],
        };
        for f in fs {
            match f.node() {
                Node::Pow(b, k) => {
                    m.insert(b.clone(), k.clone());
                }
                _ => {
                    m.insert(f.clone(), Rational::one());
                }
            }
        }
        (c, m)
    };
    let parts: Vec<(Rational, BTreeMap<Expr, Rational>)> = ts.iter().map(split).collect();
    let mut common: BTreeMap<Expr, Rational> = parts[0].1.clone();
    for (_, m) in &parts[1..] {
        common = common
            .into_iter()
            .filter_map(|(b, k)| {
                let j = m.get(&b)?;
                if k.is_positive() != j.is_positive() {
                    return None;
                }
                let pick = if k.abs() <= j.abs() { k } else { j.clone() };
                Some((b, pick))
            })
            .collect();
    }
    let lead = parts[0].0.abs();
    let mut pre = vec![Expr::constant(lead)];
    pre.extend(common.iter().map(|(b, k)| Expr::pow(b.clone(), k.clone())));
    let pre = Expr::mul(pre);
    if pre.is_one() {
        return (pre, e.clone());
    }
    let core = Expr::add(ts.iter().map(|t| t / &pre).collect::<Vec<_>>());
    (pre, core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ZeroTest};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn expansion() {
        assert_eq!(expand(&p("(x+y)^2")), p("x^2 + 2*x*y + y^2"));
        assert!(expand(&p("(x+y)*(x-y) - x^2 + y^2")).is_zero());
    }

    #[test]
    fn normal_form_cancels_known_factors() {
        assert_eq!(normal_form(&p("(x^2 - y^2)/(x - y)")), p("x + y"));
        assert_eq!(normal_form(&p("(x^2 - y^2)/(y - x)")), p("-x - y"));
        let e = p("((h1+h2)*(p1 + h2*q/2) - h1*p1)/h2");
        assert_eq!(normal_form(&e), p("p1 + h1*q/2 + h2*q/2"));
        let e = p("1/(x-1) - 1/(x-1)");
        assert!(normal_form(&e).is_zero());
    }

    #[test]
    fn normal_form_preserves_value() {
        let e = p("a/(b+c) + 1/(2*b) - c/(a*(b+c))");
        let nf = normal_form(&e);
        assert!(ZeroTest::default().equal(&e, &nf).unwrap());
    }

    #[test]
    fn collect_by_monomials() {
        let vars: BTreeSet<Var> = [Var::indexed("y", 1)].into_iter().collect();
        let e = p("y[n+1]*A(x[n],y[n]) + B(x[n],y[n])");
        let c = collect(&e, &vars).unwrap();
        assert_eq!(c.len(), 2);
        let vals: Vec<Expr> = c.values().cloned().collect();
        assert!(vals.contains(&p("A(x[n],y[n])")));
        assert!(vals.contains(&p("B(x[n],y[n])")));
        let bad = p("A(y[n+1])");
        assert!(matches!(collect(&bad, &vars), Err(Error::NonPolynomial { .. })));
    }

    #[test]
    fn common_factor_extraction() {
        let e = p("h2*(h1+h2)/(2*h1)*f(a) - p1*h2*(h1+h2)/(2*h1)*g(a)");
        let (pre, core) = factor_terms(&e);
        assert_eq!(core, p("f(a) - p1*g(a)"));
        assert_eq!(pre, p("h2*(h1+h2)/(2*h1)"));
        assert!(ZeroTest::default().equal(&(&pre * &core), &e).unwrap());
    }
}
