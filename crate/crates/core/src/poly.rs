//! Sparse multivariate polynomials over `f64` keyed by exponent vectors.
//!
//! Exponents are ordered by total degree first and then lexicographically
//! with `x1 > x2 > ... > xn`, so `N^2_2` enumerates as
//! `1, x1, x2, x1^2, x1*x2, x2^2`. Every basis index and every constraint
//! row in the crate follows this order.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A multidegree `α ∈ N^n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// The `i`-th unit vector (0-based).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Exponent(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// True when every entry is even.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|&e| e % 2 == 0)
    }

    pub fn scaled(&self, k: u32) -> Exponent {
        Exponent(self.0.iter().map(|&e| e * k).collect())
    }

    /// `(α)_2`, one bit per variable.
    pub fn parity(&self) -> Vec<bool> {
        self.0.iter().map(|&e| e % 2 == 1).collect()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Exponent {
    type Output = Exponent;

    fn add(self, rhs: &Exponent) -> Exponent {
        debug_assert_eq!(self.0.len(), rhs.0.len());
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} at position {pos} is out of range 1..={n}")]
    VariableOutOfRange { index: usize, n: usize, pos: usize },
    #[error("exponent at position {pos} is not a positive integer")]
    BadExponent { pos: usize },
    #[error("point has length {got}, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `p = Σ p_α x^α` with no stored zero coefficient.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(Exponent::zero(n), c)
    }

    pub fn monomial(exp: Exponent, c: f64) -> Self {
        let n = exp.nvars();
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(exp, c);
        }
        Polynomial { n, terms }
    }

    /// The variable `x_{i+1}` (0-based index).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(n, i), 1.0)
    }

    /// Builds a polynomial, merging duplicate exponents and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut p = Polynomial::zero(n);
        for (e, c) in terms {
            assert_eq!(e.nvars(), n, "exponent length does not match n");
            p.add_term(e, c);
        }
        p
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, PolyError> {
        Parser::new(text, n).parse()
    }

    pub fn nvars(&self) -> usize {
        self.n
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

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coeff(&self, exp: &Exponent) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> BTreeSet<Exponent> {
        self.terms.keys().cloned().collect()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, exp: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exp) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::from_terms(self.n, self.terms.iter().map(|(e, &v)| (e.clone(), v * c)))
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.n, 1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, &c)| {
                e.entries()
                    .iter()
                    .zip(point)
                    .fold(c, |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .sum())
    }

    /// Largest absolute coefficient; 0 for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n);
        let mut acc: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                *acc.entry(a + b).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Polynomial {
            n: self.n,
            terms: acc,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial(n={}, {})", self.n, self)
    }
}

/// Canonical text form, readable back by [`Polynomial::parse`].
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (e, &c)) in self.terms.iter().enumerate() {
            let neg = c < 0.0;
            match (idx, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if e.is_zero() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{e}")?;
            } else {
                write!(f, "{a}*{e}")?;
            }
        }
        Ok(())
    }
}

/// Parses the polynomial text grammar: signed terms, each a coefficient,
/// a monomial `x1^2*x3`, or `coeff*monomial`.
pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial, PolyError> {
    Polynomial::parse(text, n)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, n: usize) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            n,
        }
    }

    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Polynomial, PolyError> {
        let mut poly = Polynomial::zero(self.n);
        if self.peek().is_none() {
            return Err(self.err("empty input"));
        }
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1.0
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1.0
                }
                Some(_) if first => 1.0,
                Some(c) => return Err(self.err(format!("expected '+' or '-', found '{}'", c as char))),
                None => break,
            };
            first = false;
            let (exp, c) = self.term()?;
            poly.add_term(exp, sign * c);
            if self.peek().is_none() {
                break;
            }
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Exponent, f64), PolyError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let (c, _) = self.number()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    let e = self.monomial()?;
                    Ok((e, c))
                } else {
                    Ok((Exponent::zero(self.n), c))
                }
            }
            Some(b'x') => Ok((self.monomial()?, 1.0)),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("expected a term")),
        }
    }

    fn monomial(&mut self) -> Result<Exponent, PolyError> {
        let mut e = vec![0u32; self.n];
        loop {
            if self.peek() != Some(b'x') {
                return Err(self.err("expected a variable 'xI'"));
            }
            let var_pos = self.pos;
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a variable index after 'x'"));
            }
            let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("variable index too large"))?;
            if idx == 0 || idx > self.n {
                return Err(PolyError::VariableOutOfRange {
                    index: idx,
                    n: self.n,
                    pos: var_pos,
                });
            }
            let mut power = 1u32;
            if self.peek() == Some(b'^') {
                self.pos += 1;
                self.skip_ws();
                let epos = self.pos;
                let (val, integral) = self.number().map_err(|_| PolyError::BadExponent { pos: epos })?;
                if !integral || val < 1.0 || val > u32::MAX as f64 {
                    return Err(PolyError::BadExponent { pos: epos });
                }
                power = val as u32;
            }
            e[idx - 1] += power;
            if self.peek() == Some(b'*') {
                self.pos += 1;
                continue;
            }
            return Ok(Exponent(e));
        }
    }

    /// Decimal literal; also reports whether it was written as an integer.
    fn number(&mut self) -> Result<(f64, bool), PolyError> {
        self.skip_ws();
        let start = self.pos;
        let mut integral = true;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            integral = false;
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            integral = false;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                return Err(self.err("malformed exponent in number"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| self.err("malformed number"))?;
        Ok((v, integral))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[u32]) -> Exponent {
        Exponent::new(v.to_vec())
    }

    #[test]
    fn parses_unconstrained_example() {
        let p = parse_polynomial("1+x1^4+x2^4+x3^4+x1*x2*x3+x2", 3).unwrap();
        assert_eq!(p.len(), 6);
        let supp = p.support();
        assert!(supp.contains(&e(&[1, 1, 1])));
        assert!(supp.contains(&e(&[0, 1, 0])));
        let expected: BTreeSet<_> = [
            e(&[0, 0, 0]),
            e(&[4, 0, 0]),
            e(&[0, 4, 0]),
            e(&[0, 0, 4]),
            e(&[1, 1, 1]),
            e(&[0, 1, 0]),
        ]
        .into_iter()
        .collect();
        assert_eq!(supp, expected);
    }

    #[test]
    fn zero_and_cancellation() {
        let z = parse_polynomial("0", 2).unwrap();
        assert!(z.is_zero());
        assert!(z.support().is_empty());

        let p = parse_polynomial("x1^2 - x1^2 + 3", 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&e(&[0])), 3.0);
    }

    #[test]
    fn constant_support() {
        let p = parse_polynomial("5", 2).unwrap();
        assert_eq!(p.support().into_iter().collect::<Vec<_>>(), vec![e(&[0, 0])]);
    }

    #[test]
    fn whitespace_and_repeated_factors() {
        let p = parse_polynomial(" 2 * x1 * x1 ^ 2 - 0.5*x2 ", 2).unwrap();
        assert_eq!(p.coeff(&e(&[3, 0])), 2.0);
        assert_eq!(p.coeff(&e(&[0, 1])), -0.5);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_polynomial("x3", 2),
            Err(PolyError::VariableOutOfRange { index: 3, n: 2, pos: 0 })
        ));
        assert!(matches!(
            parse_polynomial("x1^1.5", 2),
            Err(PolyError::BadExponent { pos: 3 })
        ));
        assert!(matches!(parse_polynomial("x1^0", 2), Err(PolyError::BadExponent { .. })));
        assert!(matches!(parse_polynomial("1 + * x1", 2), Err(PolyError::Syntax { pos: 4, .. })));
        assert!(matches!(parse_polynomial("x1 x2", 2), Err(PolyError::Syntax { .. })));
        assert!(matches!(parse_polynomial("", 2), Err(PolyError::Syntax { .. })));
        assert!(matches!(parse_polynomial("x0", 2), Err(PolyError::VariableOutOfRange { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let p = parse_polynomial("x1^4+x2^4-x1*x2", 2).unwrap();
        assert_eq!(p.evaluate(&[1.0, 1.0]).unwrap(), 1.0);
        let q = parse_polynomial("7 - 3*x1*x2^2 + x2", 2).unwrap();
        assert_eq!(q.evaluate(&[0.0, 0.0]).unwrap(), 7.0);
        assert!(matches!(
            q.evaluate(&[1.0]),
            Err(PolyError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn graded_order_lists_x1_first() {
        let mut v = vec![e(&[0, 2]), e(&[1, 0]), e(&[0, 0]), e(&[1, 1]), e(&[0, 1]), e(&[2, 0])];
        v.sort();
        assert_eq!(
            v,
            vec![e(&[0, 0]), e(&[1, 0]), e(&[0, 1]), e(&[2, 0]), e(&[1, 1]), e(&[0, 2])]
        );
    }

    #[test]
    fn display_round_trip() {
        let p = parse_polynomial("-x1 + 2.5*x1^2*x2 - 1e-3 + x2^3", 2).unwrap();
        let s = p.to_string();
        assert_eq!(s, "-0.001 - x1 + 2.5*x1^2*x2 + x2^3");
        assert_eq!(parse_polynomial(&s, 2).unwrap(), p);
    }

    #[test]
    fn product_and_cancellation() {
        let a = parse_polynomial("x1 - x2", 2).unwrap();
        let b = parse_polynomial("x1 + x2", 2).unwrap();
        let p = &a * &b;
        assert_eq!(p, parse_polynomial("x1^2 - x2^2", 2).unwrap());
        let z = &p - &p;
        assert!(z.is_zero());
    }
}
