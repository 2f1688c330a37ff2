//! Differentiation, substitution and related tree rewrites.

use std::collections::BTreeMap;

use super::{int, Expr, Node, UnknownFn, Var};

/// `∂^slots f ≡ 0` as an identity of the function `f`.
///
/// An empty slot list states `f ≡ 0`. Any formal partial of `f` whose slot
/// multiset contains `slots` is annihilated by the rule.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZeroRule {
    pub func: UnknownFn,
    pub slots: Vec<usize>,
}

impl ZeroRule {
    pub fn new(func: UnknownFn, mut slots: Vec<usize>) -> Self {
        slots.sort_unstable();
        ZeroRule { func, slots }
    }

    fn annihilates(&self, f: &UnknownFn, slots: &[usize]) -> bool {
        if f != &self.func {
            return false;
        }
        // multiset containment, both sorted
        let mut it = slots.iter().peekable();
        'outer: for s in &self.slots {
            while let Some(&&t) = it.peek() {
                it.next();
                if t == *s {
                    continue 'outer;
                }
                if t > *s {
                    return false;
                }
            }
            return false;
        }
        true
    }
}

impl Expr {
    /// Exact partial derivative with respect to `v`.
    ///
    /// Unknown-function applications expand by the chain rule into formal
    /// partial-derivative nodes.
    pub fn diff(&self, v: &Var) -> Expr {
        if !self.contains_var(v) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.diff(v)).collect::<Vec<_>>()),
            Node::Mul(fs) => {
                let mut terms = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    let d = f.diff(v);
                    if d.is_zero() {
                        continue;
                    }
                    let mut prod: Vec<Expr> = fs.to_vec();
                    prod[i] = d;
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Node::Pow(b, k) => Expr::mul([
                Expr::constant(k.clone()),
                Expr::pow(b.clone(), k - int(1)),
                b.diff(v),
            ]),
            Node::Apply(f, args) => chain(f, &[], args, v),
            Node::Deriv(f, slots, args) => chain(f, slots, args, v),
        }
    }

    /// Simultaneous substitution of variables, followed by canonicalization.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        self.rebuild(&mut |e| {
            if !e.free_vars().iter().any(|v| bindings.contains_key(v)) {
                return Some(e.clone());
            }
            match e.node() {
                Node::Var(v) => bindings.get(v).cloned(),
                _ => None,
            }
        })
    }

    /// Replaces every variable through `f` (variables mapped to `None` are kept).
    pub fn map_vars(&self, f: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
        self.rebuild(&mut |e| {
            if e.free_vars().is_empty() {
                return Some(e.clone());
            }
            match e.node() {
                Node::Var(v) => Some(f(v).unwrap_or_else(|| e.clone())),
                _ => None,
            }
        })
    }

    /// Shifts every lattice index by `m`: `x[n+j] -> x[n+j+m]`.
    pub fn shift(&self, m: i32) -> Expr {
        if m == 0 {
            return self.clone();
        }
        self.map_vars(&|v| v.offset().map(|_| Expr::var(v.shifted(m))))
    }

    /// Replaces applications of `f` (and its formal partials) by a concrete body
    /// written over `params`.
    pub fn instantiate(&self, f: &UnknownFn, params: &[Var], body: &Expr) -> Expr {
        assert_eq!(params.len(), f.arity(), "parameter count must match arity");
        self.rebuild(&mut |e| {
            if !e.has_unknowns() {
                return Some(e.clone());
            }
            let (slots, args): (&[usize], &[Expr]) = match e.node() {
                Node::Apply(g, args) if g == f => (&[], args),
                Node::Deriv(g, s, args) if g == f => (s, args),
                _ => return None,
            };
            let args: Vec<Expr> = args
                .iter()
                .map(|a| a.instantiate(f, params, body))
                .collect();
            let mut d = body.clone();
            for &s in slots {
                d = d.diff(&params[s]);
            }
            let map: BTreeMap<Var, Expr> = params.iter().cloned().zip(args).collect();
            Some(d.substitute(&map))
        })
    }

    /// Drops every formal partial annihilated by one of the rules.
    pub fn apply_zero_rules(&self, rules: &[ZeroRule]) -> Expr {
        if rules.is_empty() {
            return self.clone();
        }
        self.rebuild(&mut |e| {
            if !e.has_unknowns() {
                return Some(e.clone());
            }
            let (f, slots) = match e.node() {
                Node::Apply(f, _) => (f, &[][..]),
                Node::Deriv(f, s, _) => (f, &s[..]),
                _ => return None,
            };
            if rules.iter().any(|r| r.annihilates(f, slots)) {
                Some(Expr::zero())
            } else {
                None
            }
        })
    }
}

fn chain(f: &UnknownFn, slots: &[usize], args: &[Expr], v: &Var) -> Expr {
    let mut terms = Vec::new();
    for (i, a) in args.iter().enumerate() {
        let da = a.diff(v);
        if da.is_zero() {
            continue;
        }
        let mut s = slots.to_vec();
        s.push(i);
        let partial = f.partial(&s, args.to_vec()).expect("slot within arity");
        terms.push(Expr::mul([partial, da]));
    }
    Expr::add(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equals_probabilistic, parse};

    fn v(name: &str) -> Var {
        Var::plain(name)
    }

    #[test]
    fn power_rule() {
        let e = parse("x^2").unwrap();
        assert_eq!(e.diff(&v("x")), parse("2*x").unwrap());
        assert!(parse("5").unwrap().diff(&v("x")).is_zero());
    }

    #[test]
    fn unknown_function_single_slot() {
        let e = parse("xi(x[n],y[n],x[n+1],y[n+1])").unwrap();
        let d = e.diff(&Var::indexed("y", 1));
        assert_eq!(d, parse("D[4](xi)(x[n],y[n],x[n+1],y[n+1])").unwrap());
    }

    #[test]
    fn chain_rule_through_argument() {
        // d/dp phi(x, y + h p) = h * D[2](phi)(x, y + h p)
        let e = parse("phi(x, y + h*p)").unwrap();
        let d = e.diff(&v("p"));
        let oracle = parse("h*D[2](phi)(x, y + h*p)").unwrap();
        assert_eq!(d, oracle);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = parse("x - y").unwrap();
        let mut b = BTreeMap::new();
        b.insert(v("x"), Expr::sym("y"));
        b.insert(v("y"), Expr::sym("x"));
        assert_eq!(e.substitute(&b), parse("y - x").unwrap());
    }

    #[test]
    fn chart_substitutions() {
        let mut b = BTreeMap::new();
        b.insert(Var::indexed("x", 1), parse("x[n] + h").unwrap());
        assert_eq!(
            parse("x[n+1] - x[n]").unwrap().substitute(&b),
            Expr::sym("h")
        );
        let mut b = BTreeMap::new();
        b.insert(Var::indexed("y", 1), parse("y[n] + h*p").unwrap());
        assert_eq!(
            parse("(y[n+1] - y[n])/h").unwrap().substitute(&b),
            Expr::sym("p")
        );
    }

    #[test]
    fn shift_round_trip() {
        let e = parse("xi(x[n],y[n],x[n+1],y[n+1]) + h[n+1]*p1[n+1]").unwrap();
        assert_eq!(
            e.shift(1),
            parse("xi(x[n+1],y[n+1],x[n+2],y[n+2]) + h[n+2]*p1[n+2]").unwrap()
        );
        assert_eq!(e.shift(1).shift(-1), e);
        assert_eq!(parse("x[n]").unwrap().shift(1), parse("x[n+1]").unwrap());
    }

    #[test]
    fn instantiate_concrete_body() {
        let f = UnknownFn::new("f", 2);
        let e = parse("f(a, b) + D[1](f)(a, b)").unwrap();
        let body = parse("s^2*t").unwrap();
        let r = e.instantiate(&f, &[v("s"), v("t")], &body);
        assert!(equals_probabilistic(&r, &parse("a^2*b + 2*a*b").unwrap(), 8).unwrap());
    }

    #[test]
    fn zero_rules_annihilate_supersets() {
        let xi = UnknownFn::new("xi", 2);
        let e = parse("D[2](xi)(a,b) + D[1,2](xi)(a,b) + D[1](xi)(a,b)").unwrap();
        let r = e.apply_zero_rules(&[ZeroRule::new(xi.clone(), vec![1])]);
        assert_eq!(r, parse("D[1](xi)(a,b)").unwrap());
        let r = e.apply_zero_rules(&[ZeroRule::new(xi, vec![])]);
        assert!(r.is_zero());
    }
}
