//! Scheme and field definition files.
//!
//! Both are line-oriented `key = value` files; `#` starts a comment. A scheme
//! file has the keys `name`, `points`, `e1`, `e2`, optionally `limit` and any
//! number of `candidate = name | order | xi | phi` lines. A field file has
//! `name`, `order`, `xi`, `phi` and optionally `lattice = transforming|fixed`
//! with `spacing` for fixed lattices.
//!
//! ```text
//! # discrete y'' = 0
//! name = free particle
//! points = 3
//! e1 = y[n+2] - 2*y[n+1] + y[n]
//! e2 = x[n+2] - 2*x[n+1] + x[n]
//! limit = y2
//! candidate = dilation | 0 | x[n] | y[n]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::contact::Lattice;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Rational};
use crate::prolong::MultiPointVectorField;
use crate::scheme::Scheme;

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub name: String,
    pub field: MultiPointVectorField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeFile {
    pub scheme: Scheme,
    pub candidates: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub name: String,
    pub field: MultiPointVectorField,
    pub lattice: Lattice,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Definition {
    Scheme(SchemeFile),
    Field(FieldFile),
}

struct Entry {
    line: usize,
    value: String,
}

struct Lines<'a> {
    file: &'a str,
    keys: BTreeMap<String, Entry>,
    candidates: Vec<Entry>,
}

impl<'a> Lines<'a> {
    fn read(file: &'a str, text: &str) -> Result<Self> {
        let mut keys = BTreeMap::new();
        let mut candidates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(file_error(file, line, "expected `key = value`"));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k == "candidate" {
                candidates.push(Entry { line, value: v });
            } else if keys.contains_key(&k) {
                return Err(file_error(file, line, &format!("duplicate key `{}`", k)));
            } else {
                keys.insert(k, Entry { line, value: v });
            }
        }
        Ok(Lines {
            file,
            keys,
            candidates,
        })
    }

    fn allow(&self, allowed: &[&str]) -> Result<()> {
        for (k, e) in &self.keys {
            if !allowed.contains(&k.as_str()) {
                return Err(file_error(self.file, e.line, &format!("unknown key `{}`", k)));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.keys.get(key)
    }

    fn need(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| file_error(self.file, 0, &format!("missing key `{}`", key)))
    }

    fn expr(&self, e: &Entry) -> Result<Expr> {
        expr_at(self.file, e.line, &e.value)
    }

    fn usize(&self, e: &Entry) -> Result<usize> {
        e.value
            .parse()
            .map_err(|_| file_error(self.file, e.line, "expected a non-negative integer"))
    }
}

fn file_error(file: &str, line: usize, message: &str) -> Error {
    Error::File {
        file: file.to_string(),
        line,
        message: message.to_string(),
    }
}

fn expr_at(file: &str, line: usize, text: &str) -> Result<Expr> {
    parse(text).map_err(|e| file_error(file, line, &e.to_string()))
}

fn name_or_file(l: &Lines) -> String {
    l.get("name").map(|e| e.value.clone()).unwrap_or_else(|| l.file.to_string())
}

pub fn parse_scheme(file: &str, text: &str) -> Result<SchemeFile> {
    let l = Lines::read(file, text)?;
    l.allow(&["name", "points", "e1", "e2", "limit"])?;
    let e1 = l.expr(l.need("e1")?)?;
    let e2 = l.expr(l.need("e2")?)?;
    let limit = l.get("limit").map(|e| l.expr(e)).transpose()?;
    let name = name_or_file(&l);
    let scheme = match l.get("points") {
        Some(e) => Scheme::with_points(&name, l.usize(e)?, e1, e2, limit)?,
        None => Scheme::new(&name, e1, e2, limit)?,
    };
    let mut candidates = Vec::new();
    for c in &l.candidates {
        let parts: Vec<&str> = c.value.split('|').map(str::trim).collect();
        let [name, order, xi, phi] = parts[..] else {
            return Err(file_error(file, c.line, "expected `candidate = name | order | xi | phi`"));
        };
        let order = order
            .parse()
            .map_err(|_| file_error(file, c.line, "candidate order must be a non-negative integer"))?;
        let field = MultiPointVectorField::new(
            order,
            expr_at(file, c.line, xi)?,
            expr_at(file, c.line, phi)?,
        )?;
        candidates.push(Candidate {
            name: name.to_string(),
            field,
        });
    }
    Ok(SchemeFile { scheme, candidates })
}

pub fn parse_field(file: &str, text: &str) -> Result<FieldFile> {
    let l = Lines::read(file, text)?;
    if let Some(c) = l.candidates.first() {
        return Err(file_error(file, c.line, "candidates belong in scheme files"));
    }
    l.allow(&["name", "order", "xi", "phi", "lattice", "spacing"])?;
    let order = l.usize(l.need("order")?)?;
    let field = MultiPointVectorField::new(order, l.expr(l.need("xi")?)?, l.expr(l.need("phi")?)?)?;
    let lattice = match l.get("lattice").map(|e| (e.line, e.value.as_str())) {
        None | Some((_, "transforming")) => {
            if let Some(e) = l.get("spacing") {
                return Err(file_error(file, e.line, "`spacing` needs `lattice = fixed`"));
            }
            Lattice::Transforming
        }
        Some((_, "fixed")) => {
            let e = l.need("spacing")?;
            let h = l.expr(e)?;
            let h: Rational = h
                .as_const()
                .cloned()
                .ok_or_else(|| file_error(file, e.line, "spacing must be a rational constant"))?;
            Lattice::Fixed(h)
        }
        Some((line, other)) => {
            return Err(file_error(
                file,
                line,
                &format!("lattice must be `transforming` or `fixed`, not `{}`", other),
            ))
        }
    };
    Ok(FieldFile {
        name: name_or_file(&l),
        field,
        lattice,
    })
}

/// A scheme file if it defines `e1`, a field file otherwise.
pub fn parse_definition(file: &str, text: &str) -> Result<Definition> {
    let is_scheme = text
        .lines()
        .any(|l| l.split('#').next().unwrap_or("").split('=').next().unwrap_or("").trim() == "e1");
    if is_scheme {
        parse_scheme(file, text).map(Definition::Scheme)
    } else {
        parse_field(file, text).map(Definition::Field)
    }
}

fn read(path: &Path) -> Result<(String, String)> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| file_error(&name, 0, &e.to_string()))?;
    Ok((name, text))
}

pub fn load_scheme(path: &Path) -> Result<SchemeFile> {
    let (name, text) = read(path)?;
    parse_scheme(&name, &text)
}

pub fn load_field(path: &Path) -> Result<FieldFile> {
    let (name, text) = read(path)?;
    parse_field(&name, &text)
}

pub fn load_definition(path: &Path) -> Result<Definition> {
    let (name, text) = read(path)?;
    parse_definition(&name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;


    const FREE: &str = "\
# discrete y'' = 0
name = free particle
points = 3
e1 = y[n+2] - 2*y[n+1] + y[n]
e2 = x[n+2] - 2*x[n+1] + x[n]   # uniform lattice
limit = y2
candidate = translation | 0 | 1 | 0
candidate = projective | 0 | x[n]^2 | x[n]*y[n]
";

    #[test]
    fn scheme_file() {
        let s = parse_scheme("free.scheme", FREE).unwrap();
        assert_eq!(s.scheme.name, "free particle");
        assert_eq!(s.scheme.points, 3);
        assert_eq!(s.scheme.limit, Some(parse("y2").unwrap()));
        assert_eq!(s.candidates.len(), 2);
        assert_eq!(s.candidates[1].field.xi, parse("x[n]^2").unwrap());
    }

    #[test]
    fn field_file() {
        let f = parse_field("f", "name = evo\norder = 1\nxi = 0\nphi = y[n+1]\nlattice = fixed\nspacing = 1/2\n").unwrap();
        assert_eq!(f.lattice, Lattice::Fixed(crate::expr::rat(1, 2)));
        let f = parse_field("f", "order = 0\nxi = x[n]\nphi = y[n]").unwrap();
        assert_eq!((f.name.as_str(), f.lattice), ("f", Lattice::Transforming));
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_field("f", "order = 0\nxi = x[n] +\nphi = 0").unwrap_err();
        assert!(matches!(err, Error::File { line: 2, .. }), "{:?}", err);
        let err = parse_field("f", "order = 0\nxi = 1\nphi = 0\ncolour = red").unwrap_err();
        assert!(matches!(err, Error::File { line: 4, .. }));
        let err = parse_field("f", "order = 0\norder = 1\nxi = 1\nphi = 0").unwrap_err();
        assert!(matches!(err, Error::File { line: 2, .. }));
        let err = parse_scheme("s", "e1 = y[n+1]\ne2 = x[n+1]-x[n]-1\ncandidate = a | 0 | 1").unwrap_err();
        assert!(matches!(err, Error::File { line: 3, .. }));
    }

    #[test]
    fn invariant_violations_pass_through() {
        let err = parse_field("f", "order = 0\nxi = x[n+1]\nphi = 0").unwrap_err();
        assert!(matches!(err, Error::InvalidField(_)));
        let err = parse_scheme("s", "points = 2\ne1 = y[n+3]\ne2 = x[n+1]").unwrap_err();
        assert!(matches!(err, Error::InvalidScheme(_)));
    }

    #[test]
    fn definitions_are_detected() {
        assert!(matches!(parse_definition("s", FREE).unwrap(), Definition::Scheme(_)));
        assert!(matches!(
            parse_definition("f", "order = 0\nxi = 1\nphi = 0").unwrap(),
            Definition::Field(_)
        ));
    }
}
