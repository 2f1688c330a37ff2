//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     = term { ("+" | "-") term }
//! term     = unary { ("*" | "/") unary }
//! unary    = ("-" | "+") unary | power
//! power    = primary [ "^" unary ]            (exponent must fold to a rational)
//! primary  = number | "(" expr ")" | partial | call | variable
//! number   = digits [ "." digits ]
//! variable = ident [ "[" "n" [ ("+" | "-") digits ] "]" ]
//! call     = ident "(" expr { "," expr } ")"
//! partial  = "D" "[" slot { "," slot } "]" "(" ident ")" "(" expr { "," expr } ")"
//! ident    = letter { letter | digit | "_" }
//! ```
//!
//! Slots in `partial` are 1-based and may repeat (`D[1,1]` is a second
//! derivative in the first slot).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Expr, Rational, UnknownFn, Var};
use crate::error::{Error, Result};

/// Parses text into a canonical expression, inferring function arities from first use.
pub fn parse(text: &str) -> Result<Expr> {
    Parser::new().parse(text)
}

/// Parser with a table of declared unknown functions.
#[derive(Clone, Debug, Default)]
pub struct Parser {
    functions: BTreeMap<String, UnknownFn>,
    strict: bool,
}

impl Parser {
    pub fn new() -> Self {
        Parser::default()
    }

    /// Only the declared functions may be applied.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn declare(mut self, f: UnknownFn) -> Self {
        self.functions.insert(f.name().to_string(), f);
        self
    }

    pub fn functions(&self) -> impl Iterator<Item = &UnknownFn> {
        self.functions.values()
    }

    /// Parses `text`; functions first seen here are remembered for later calls.
    pub fn parse(&mut self, text: &str) -> Result<Expr> {
        let mut st = State {
            src: text.as_bytes(),
            pos: 0,
            parser: self,
        };
        let e = st.expr()?;
        st.ws();
        if st.pos != st.src.len() {
            return Err(st.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct State<'a> {
    src: &'a [u8],
    pos: usize,
    parser: &'a mut Parser,
}

impl State<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    /// A leading sign applies to the whole product: `-a/b` is `-(a/b)`.
    fn term(&mut self) -> Result<Expr> {
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat(b'*') {
                factors.push(self.unary()?);
            } else if self.peek() == Some(b'/') {
                let at = self.pos;
                self.pos += 1;
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(Error::Syntax {
                        offset: at,
                        message: "division by zero".into(),
                    });
                }
                factors.push(d.recip());
            } else {
                break;
            }
        }
        let t = Expr::mul(factors);
        Ok(if negate { -t } else { t })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let at = self.pos;
            let k = self.unary()?;
            let Some(k) = k.as_const().cloned() else {
                return Err(Error::Syntax {
                    offset: at,
                    message: "exponent must be a rational constant".into(),
                });
            };
            if base.is_zero() && k < Rational::zero() {
                return Err(Error::Syntax {
                    offset: at,
                    message: "division by zero".into(),
                });
            }
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                if name == "D"
                    && self.src.get(self.pos) == Some(&b'[')
                    && self.src.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit())
                {
                    return self.partial(start);
                }
                if self.src.get(self.pos) == Some(&b'[') {
                    let off = self.index()?;
                    return Ok(Expr::var(Var::indexed(&name, off)));
                }
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let args = self.args()?;
                    let f = self.function(&name, args.len(), start)?;
                    return f.call(args);
                }
                Ok(Expr::var(Var::plain(&name)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn function(&mut self, name: &str, arity: usize, at: usize) -> Result<UnknownFn> {
        match self.parser.functions.get(name) {
            Some(f) if f.arity() == arity => Ok(f.clone()),
            Some(f) => Err(Error::Arity {
                name: name.to_string(),
                expected: f.arity(),
                found: arity,
            }),
            None if self.parser.strict => Err(Error::Syntax {
                offset: at,
                message: format!("undeclared function `{}`", name),
            }),
            None => {
                let f = UnknownFn::new(name, arity);
                self.parser.functions.insert(name.to_string(), f.clone());
                Ok(f)
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        Ok(args)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn number(&mut self) -> Result<Expr> {
        let whole = self.digits()?;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let start = self.pos;
            let frac = self.digits()?;
            let scale = BigInt::from(10u32).pow((self.pos - start) as u32);
            let value = Rational::new(whole * &scale + frac, scale);
            return Ok(Expr::constant(value));
        }
        Ok(Expr::constant(Rational::from_integer(whole)))
    }

    /// `[n]`, `[n+3]`, `[n-1]`.
    fn index(&mut self) -> Result<i32> {
        self.expect(b'[')?;
        if !(self.peek() == Some(b'n')) {
            return Err(self.err("expected `n` in index"));
        }
        self.pos += 1;
        let sign = if self.eat(b'+') {
            1
        } else if self.eat(b'-') {
            -1
        } else {
            0
        };
        let off = if sign != 0 {
            self.ws();
            let d = self.digits()?;
            let d: i32 = d.try_into().map_err(|_| self.err("index out of range"))?;
            sign * d
        } else {
            0
        };
        self.expect(b']')?;
        Ok(off)
    }

    fn partial(&mut self, at: usize) -> Result<Expr> {
        self.expect(b'[')?;
        let mut slots = Vec::new();
        loop {
            self.ws();
            let d = self.digits()?;
            let d: usize = d.try_into().map_err(|_| self.err("slot out of range"))?;
            if d == 0 {
                return Err(self.err("slots are 1-based"));
            }
            slots.push(d - 1);
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b']')?;
        self.expect(b'(')?;
        self.ws();
        let name = self.ident();
        if name.is_empty() {
            return Err(self.err("expected function name"));
        }
        self.expect(b')')?;
        self.expect(b'(')?;
        let args = self.args()?;
        let f = self.function(&name, args.len(), at)?;
        f.partial(&slots, args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, rat};

    #[test]
    fn constants_and_identities() {
        assert!(parse("0").unwrap().is_zero());
        assert!(parse("x[n]^2 - x[n]*x[n]").unwrap().is_zero());
        assert_eq!(parse("0.25").unwrap(), Expr::constant(rat(1, 4)));
        assert_eq!(parse("2^-2").unwrap(), Expr::constant(rat(1, 4)));
        assert_eq!(parse("2^3^2").unwrap(), Expr::constant(int(512)));
    }

    #[test]
    fn slope_has_four_free_variables() {
        let e = parse("(y[n+1]-y[n])/(x[n+1]-x[n])").unwrap();
        assert_eq!(e.free_vars().len(), 4);
        assert!(e.contains_var(&Var::indexed("x", 1)));
    }

    #[test]
    fn indexed_and_plain_variables() {
        let e = parse("p2[n+2] + h[n-1] + y1").unwrap();
        let vars: Vec<String> = e.free_vars().iter().map(|v| v.to_string()).collect();
        assert_eq!(vars, ["h[n-1]", "p2[n+2]", "y1"]);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x + * y") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{:?}", other),
        }
        assert!(matches!(parse("x[m]"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x^y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1/0"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn arity_mismatch_is_reported() {
        assert!(matches!(
            parse("xi(x, y) + xi(x)"),
            Err(Error::Arity { expected: 2, found: 1, .. })
        ));
        let mut p = Parser::new().declare(UnknownFn::new("phi", 4)).strict();
        assert!(matches!(p.parse("phi(a,b)"), Err(Error::Arity { .. })));
        assert!(matches!(p.parse("g(a)"), Err(Error::Syntax { .. })));
        assert!(p.parse("phi(a,b,c,d)").is_ok());
    }

    #[test]
    fn partial_derivative_syntax() {
        let e = parse("D[2,1](f)(x, y)").unwrap();
        let f = UnknownFn::new("f", 2);
        assert_eq!(e, f.partial(&[0, 1], vec![Expr::sym("x"), Expr::sym("y")]).unwrap());
    }
}
