//! Sparse multivariate polynomials with rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{fmt_q, parse_q, q, Q};
use crate::error::{Error, Result};

/// A lattice point; entries are nonnegative for polynomial exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(pub Vec<i64>);

impl Exponent {
    pub fn zeros(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Exponent(e)
    }

    pub fn ones(n: usize) -> Self {
        Exponent(vec![1; n])
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Exponent {
        Exponent(self.0.iter().map(|a| a * k).collect())
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Deref for Exponent {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Exponent {
    fn from(v: Vec<i64>) -> Self {
        Exponent(v)
    }
}

/// Degree-reverse-lexicographic comparison (`Greater` = larger monomial).
pub fn degrevlex_cmp(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let (da, db): (i64, i64) = (a.iter().sum(), b.iter().sum());
    if da != db {
        return da.cmp(&db);
    }
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

/// Finitely supported map exponent -> nonzero rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<Exponent, Q>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(Exponent::zeros(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn monomial(e: Exponent, c: Q) -> Self {
        let nvars = e.len();
        let mut p = SparsePoly::zero(nvars);
        p.add_term(e, c);
        p
    }

    /// `x_1 ... x_n`.
    pub fn coordinate_product(nvars: usize) -> Self {
        Self::monomial(Exponent::ones(nvars), Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(nvars, i), Q::one())
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Q)>,
    {
        let mut p = SparsePoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_i64_terms(nvars: usize, terms: &[(Vec<i64>, i64)]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(e, c)| (Exponent(e.clone()), q(*c))))
    }

    pub fn add_term(&mut self, e: Exponent, c: Q) {
        assert_eq!(e.len(), self.nvars, "exponent length must equal nvars");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
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

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Q)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    pub fn coeff(&self, e: &Exponent) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(Exponent::degree).max()
    }

    /// Lowest total degree of a term (the `m`-adic order).
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().map(Exponent::degree).min()
    }

    pub fn scale(&self, c: &Q) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Exponent) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.add(m), v.clone())).collect(),
        }
    }

    /// Keeps the terms whose exponent satisfies `keep`.
    pub fn filter<F: Fn(&Exponent) -> bool>(&self, keep: F) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, v)| (e.clone(), v.clone()))
                .collect(),
        }
    }

    /// Drops every term of total degree above `d`.
    pub fn truncate(&self, d: i64) -> SparsePoly {
        self.filter(|e| e.degree() <= d)
    }

    /// Product with all terms of degree above `d` discarded.
    pub fn mul_truncated(&self, other: &SparsePoly, d: i64) -> SparsePoly {
        let mut out = SparsePoly::zero(self.nvars);
        for (a, x) in &self.terms {
            if a.degree() > d {
                continue;
            }
            for (b, y) in &other.terms {
                let e = a.add(b);
                if e.degree() <= d {
                    out.add_term(e, x * y);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> SparsePoly {
        let mut out = SparsePoly::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn derivative(&self, i: usize) -> SparsePoly {
        let mut out = SparsePoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d.0[i] -= 1;
                out.add_term(d, c * q(e[i]));
            }
        }
        out
    }

    /// `x_i * d/dx_i`.
    pub fn log_derivative(&self, i: usize) -> SparsePoly {
        self.filter(|e| e[i] != 0)
            .terms
            .into_iter()
            .fold(SparsePoly::zero(self.nvars), |mut acc, (e, c)| {
                let k = e[i];
                acc.add_term(e, c * q(k));
                acc
            })
    }

    /// Applies a derivation of degree zero: `x^m -> w(m) x^m`.
    pub fn weighted(&self, w: &[Q]) -> SparsePoly {
        let mut out = SparsePoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let val = crate::arith::dot_q_i64(w, e);
            out.add_term(e.clone(), c * val);
        }
        out
    }

    /// Terms of the form `c * x_i^k`, `k > 0`.
    pub fn has_pure_power(&self, i: usize) -> bool {
        self.terms
            .keys()
            .any(|e| e[i] > 0 && e.iter().enumerate().all(|(j, &x)| j == i || x == 0))
    }

    /// Largest monomial in degree-reverse-lexicographic order.
    pub fn leading_exponent(&self) -> Option<&Exponent> {
        self.terms.keys().max_by(|a, b| degrevlex_cmp(a, b))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson {
                    e: e.0.clone(),
                    c: fmt_q(c),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let mut p = SparsePoly::zero(j.nvars);
        for t in &j.terms {
            if t.e.len() != j.nvars {
                return Err(Error::Dimension(format!(
                    "term exponent {:?} has length {} but nvars = {}",
                    t.e,
                    t.e.len(),
                    j.nvars
                )));
            }
            if t.e.iter().any(|&x| x < 0) {
                return Err(Error::Parse(format!("negative exponent {:?}", t.e)));
            }
            p.add_term(Exponent(t.e.clone()), parse_q(&t.c)?);
        }
        Ok(p)
    }

    /// Parses either the JSON form or the text grammar. `nvars` fixes the
    /// variable count for text input; otherwise it is inferred.
    pub fn parse_any(s: &str, nvars: Option<usize>) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            let j: PolyJson =
                serde_json::from_str(s).map_err(|e| Error::Parse(format!("polynomial JSON: {e}")))?;
            let p = SparsePoly::from_json(&j)?;
            if let Some(n) = nvars {
                if n != p.nvars {
                    return Err(Error::Dimension(format!(
                        "JSON declares {} variables, expected {n}",
                        p.nvars
                    )));
                }
            }
            Ok(p)
        } else {
            parse_text(s, nvars)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Vec<i64>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub terms: Vec<TermJson>,
}

impl Serialize for SparsePoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        SparsePoly::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&-Q::one())
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut acc: BTreeMap<Exponent, Q> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                *acc.entry(a.add(b)).or_insert_with(Q::zero) += x * y;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        SparsePoly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut exps: Vec<&Exponent> = self.terms.keys().collect();
        exps.sort_by(|a, b| degrevlex_cmp(b, a));
        for (k, e) in exps.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, x)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_q(&a), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl FromStr for SparsePoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SparsePoly::parse_any(s, None)
    }
}

enum Factor {
    Coef(Q),
    Var(usize, i64),
}

/// Text grammar: terms `c*x1^a1*...*xn^an` joined by `+`/`-`.
fn parse_text(src: &str, nvars: Option<usize>) -> Result<SparsePoly> {
    let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let err = |pos: usize, msg: &str| Error::Parse(format!("{msg} at position {pos} in `{src}`"));
    let mut pos = 0;
    let mut raw_terms: Vec<(Q, Vec<(usize, i64)>)> = Vec::new();
    let read_int = |pos: &mut usize| -> Option<String> {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        (start < *pos).then(|| chars[start..*pos].iter().collect())
    };
    let mut first = true;
    while pos < chars.len() {
        let mut sign = Q::one();
        if chars[pos] == '+' || chars[pos] == '-' {
            if chars[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        } else if !first {
            return Err(err(pos, "expected `+` or `-`"));
        }
        first = false;
        let mut coef = sign;
        let mut vars = Vec::new();
        loop {
            let factor = if pos < chars.len() && chars[pos].is_ascii_digit() {
                let num = read_int(&mut pos).expect("digit present");
                if pos < chars.len() && chars[pos] == '/' {
                    pos += 1;
                    let den = read_int(&mut pos).ok_or_else(|| err(pos, "expected denominator"))?;
                    Factor::Coef(parse_q(&format!("{num}/{den}"))?)
                } else {
                    Factor::Coef(parse_q(&num)?)
                }
            } else if pos < chars.len() && chars[pos] == 'x' {
                pos += 1;
                let idx = read_int(&mut pos).ok_or_else(|| err(pos, "expected variable index after `x`"))?;
                let idx: usize = idx.parse().map_err(|_| err(pos, "bad variable index"))?;
                if idx == 0 {
                    return Err(err(pos, "variables are numbered from x1"));
                }
                let mut power = 1i64;
                if pos < chars.len() && chars[pos] == '^' {
                    pos += 1;
                    let p = read_int(&mut pos).ok_or_else(|| err(pos, "expected exponent"))?;
                    power = p.parse().map_err(|_| err(pos, "bad exponent"))?;
                }
                Factor::Var(idx - 1, power)
            } else {
                return Err(err(pos, "expected coefficient or variable"));
            };
            match factor {
                Factor::Coef(c) => coef *= c,
                Factor::Var(i, p) => vars.push((i, p)),
            }
            if pos < chars.len() && chars[pos] == '*' {
                pos += 1;
                continue;
            }
            break;
        }
        raw_terms.push((coef, vars));
    }
    let max_var = raw_terms
        .iter()
        .flat_map(|(_, v)| v.iter().map(|(i, _)| i + 1))
        .max()
        .unwrap_or(0);
    let n = match nvars {
        Some(n) if n < max_var => {
            return Err(Error::Dimension(format!(
                "polynomial uses x{max_var} but only {n} variables were declared"
            )))
        }
        Some(n) => n,
        None => max_var.max(1),
    };
    let mut p = SparsePoly::zero(n);
    for (c, vars) in raw_terms {
        let mut e = vec![0i64; n];
        for (i, k) in vars {
            e[i] += k;
        }
        p.add_term(Exponent(e), c);
    }
    Ok(p)
}
