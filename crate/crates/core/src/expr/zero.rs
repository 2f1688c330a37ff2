//! Probabilistic identity testing.
//!
//! An expression is declared identically zero when it canonicalizes to 0 or
//! vanishes at every one of several random rational points. Unknown
//! functions are replaced by a random jet oracle: the value of every formal
//! partial at every distinct (exact) argument tuple is an independent random
//! rational, drawn lazily and remembered for the duration of one trial. For
//! finitely many distinct points such data is always realized by some
//! polynomial, so this is equivalent to substituting random polynomial
//! surrogates of sufficiently high degree.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::Evaluator;
use super::{Expr, Rational, UnknownFn, Var};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_1e71;
pub const DEFAULT_TRIALS: usize = 6;

/// Randomized zero tester with a fixed seed and trial count.
#[derive(Clone, Copy, Debug)]
pub struct ZeroTest {
    pub trials: usize,
    pub seed: u64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-997..=997);
    let den: i64 = rng.gen_range(1..=97);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

impl ZeroTest {
    pub fn new(trials: usize, seed: u64) -> Self {
        assert!(trials >= 1, "at least one trial is required");
        ZeroTest { trials, seed }
    }

    /// True iff `e` is (with high probability) identically zero.
    pub fn is_zero(&self, e: &Expr) -> Result<bool> {
        if e.is_zero() {
            return Ok(true);
        }
        if e.as_const().is_some() {
            return Ok(false);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (e.size() as u64).rotate_left(17));
        let mut usable = 0usize;
        let max_attempts = self.trials * 8;
        let mut attempts = 0usize;
        while usable < self.trials && attempts < max_attempts {
            attempts += 1;
            match sample(e, &mut rng) {
                Ok(v) => {
                    if !v {
                        return Ok(false);
                    }
                    usable += 1;
                }
                Err(Error::DivisionByZero) | Err(Error::NonFinite) => continue,
                Err(err) => return Err(err),
            }
        }
        if usable == 0 {
            return Err(Error::Undecidable);
        }
        Ok(true)
    }

    pub fn equal(&self, a: &Expr, b: &Expr) -> Result<bool> {
        self.is_zero(&(a - b))
    }
}

type JetKey = (UnknownFn, Vec<usize>, Vec<Rational>);

/// Evaluates once at a random point; `Ok(true)` if the value is zero.
fn sample(e: &Expr, rng: &mut ChaCha8Rng) -> Result<bool> {
    let point: BTreeMap<Var, Rational> = e
        .free_vars()
        .iter()
        .map(|v| (v.clone(), random_rational(rng)))
        .collect();
    let jet_seed: u64 = rng.gen();
    let mut jets: HashMap<JetKey, Rational> = HashMap::new();
    let mut jet_rng = ChaCha8Rng::seed_from_u64(jet_seed);
    let exact = {
        let lookup = |v: &Var| point.get(v).cloned();
        let mut funcs = |f: &UnknownFn, slots: &[usize], args: &[Rational]| -> Result<Rational> {
            let key = (f.clone(), slots.to_vec(), args.to_vec());
            Ok(jets
                .entry(key)
                .or_insert_with(|| random_rational(&mut jet_rng))
                .clone())
        };
        Evaluator::new(&lookup, &mut funcs).eval(e)
    };
    match exact {
        Ok(v) => Ok(v.is_zero()),
        Err(Error::Inexact(_)) => sample_float(e, &point, jet_seed),
        Err(err) => Err(err),
    }
}

/// Floating fallback for expressions with irrational powers.
fn sample_float(e: &Expr, point: &BTreeMap<Var, Rational>, jet_seed: u64) -> Result<bool> {
    let mut jets: HashMap<(UnknownFn, Vec<usize>, Vec<u64>), f64> = HashMap::new();
    let mut jet_rng = ChaCha8Rng::seed_from_u64(jet_seed);
    let lookup = |v: &Var| point.get(v).and_then(|r| r.to_f64());
    let mut funcs = |f: &UnknownFn, slots: &[usize], args: &[f64]| -> Result<f64> {
        let key = (f.clone(), slots.to_vec(), args.iter().map(|a| a.to_bits()).collect());
        Ok(*jets
            .entry(key)
            .or_insert_with(|| random_rational(&mut jet_rng).to_f64().unwrap()))
    };
    let mut ev = Evaluator::new(&lookup, &mut funcs);
    let v = ev.eval(e)?;
    let scale = magnitude(e, &mut ev).max(1.0);
    Ok(v.abs() <= 1e-9 * scale)
}

fn magnitude(e: &Expr, ev: &mut Evaluator<'_, f64>) -> f64 {
    use super::Node;
    match e.node() {
        Node::Add(ts) => ts
            .iter()
            .map(|t| ev.eval(t).map(f64::abs).unwrap_or(0.0))
            .fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// `a == b` as functions, tested at `trials` random points with the default seed.
pub fn equals_probabilistic(a: &Expr, b: &Expr, trials: usize) -> Result<bool> {
    ZeroTest::new(trials, DEFAULT_SEED).equal(a, b)
}
