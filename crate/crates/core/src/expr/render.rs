//! Renderer producing the same text grammar the parser accepts.

use std::fmt;

use num_traits::{One, Signed};

use super::{int, Expr, Node, Rational};

const SUM: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

fn wrap(s: (String, u8), min: u8) -> String {
    if s.1 < min {
        format!("({})", s.0)
    } else {
        s.0
    }
}

fn constant(c: &Rational) -> (String, u8) {
    if c.is_negative() {
        (c.to_string(), SUM)
    } else if c.denom().is_one() {
        (c.to_string(), ATOM)
    } else {
        (c.to_string(), MUL)
    }
}

fn exponent(k: &Rational) -> String {
    if k.denom().is_one() && !k.is_negative() {
        k.to_string()
    } else {
        format!("({})", k)
    }
}

fn product(coeff: &Rational, factors: &[Expr]) -> (String, u8) {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f.node() {
            Node::Pow(b, k) if k.is_negative() => {
                den.push(render(&Expr::pow(b.clone(), -k)));
            }
            _ => num.push(render(f)),
        }
    }
    let mag = coeff.abs();
    let mut top: Vec<String> = Vec::new();
    if !mag.numer().is_one() || num.is_empty() {
        top.push(mag.numer().to_string());
    }
    top.extend(num.into_iter().map(|s| wrap(s, POW)));
    let mut out = top.join("*");
    let mut bottom: Vec<(String, u8)> = Vec::new();
    if !mag.denom().is_one() {
        // `c/(d*(a + b))` would re-parse with `d` distributed over the sum
        if den.len() == 1 && den[0].1 == SUM {
            out.push_str(&format!("/{}", mag.denom()));
        } else {
            bottom.push((mag.denom().to_string(), ATOM));
        }
    }
    bottom.extend(den);
    match bottom.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&wrap(bottom.pop().unwrap(), POW));
        }
        _ => {
            let inner: Vec<String> = bottom.into_iter().map(|s| wrap(s, POW)).collect();
            out.push_str(&format!("/({})", inner.join("*")));
        }
    }
    if coeff.is_negative() {
        (format!("-{}", out), SUM)
    } else {
        (out, MUL)
    }
}

fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        Node::Const(c) => constant(c),
        Node::Var(v) => (v.to_string(), ATOM),
        Node::Apply(f, args) => (format!("{}({})", f.name(), join_args(args)), ATOM),
        Node::Deriv(f, slots, args) => {
            let s: Vec<String> = slots.iter().map(|s| (s + 1).to_string()).collect();
            (
                format!("D[{}]({})({})", s.join(","), f.name(), join_args(args)),
                ATOM,
            )
        }
        Node::Pow(b, k) => {
            if k.is_negative() {
                product(&int(1), std::slice::from_ref(e))
            } else {
                (format!("{}^{}", wrap(render(b), ATOM), exponent(k)), POW)
            }
        }
        Node::Mul(fs) => match fs[0].node() {
            Node::Const(c) => product(c, &fs[1..]),
            _ => product(&int(1), fs),
        },
        Node::Add(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (c, _) = t.split_coefficient();
                if c.is_negative() {
                    out.push_str(if i == 0 { "-" } else { " - " });
                    out.push_str(&wrap(render(&-t), MUL));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&wrap(render(t), MUL));
                }
            }
            (out, SUM)
        }
    }
}

fn join_args(args: &[Expr]) -> String {
    args.iter()
        .map(|a| render(a).0)
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn round(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn renders_quotients_compactly() {
        assert_eq!(round("(y[n+1]-y[n])/(x[n+1]-x[n])"), "(y[n+1] - y[n])/(x[n+1] - x[n])");
        assert_eq!(round("3*x/(4*y)"), "3*x/(4*y)");
        assert_eq!(round("-h/2"), "-h/2");
        assert_eq!(round("1/(2*x)"), "1/(2*x)");
    }

    #[test]
    fn renders_signs_in_sums() {
        assert_eq!(round("a - 3/4*b"), "a - 3*b/4");
        assert_eq!(round("-x^2"), "-x^2");
        assert_eq!(round("x^(1/2) - 1"), "-1 + x^(1/2)");
    }

    #[test]
    fn renders_partials() {
        assert_eq!(round("D[4](xi)(a,b,c,d)"), "D[4](xi)(a, b, c, d)");
    }
}
