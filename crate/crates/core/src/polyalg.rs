//! Sparse polynomials in `x`, `y`, `z` with exact rational coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic with `x > y > z`. Zero coefficients are never stored,
//! so structural equality is polynomial equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rat = BigRational;

/// Largest total degree any stored monomial may have.
pub const MAX_DEGREE: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("total degree {0} exceeds the bound {MAX_DEGREE}")]
    DegreeOverflow(u32),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by a non-constant or zero polynomial")]
    BadDivisor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }
}

/// Exponent triple `x^ex * y^ey * z^ez`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    pub ex: u32,
    pub ey: u32,
    pub ez: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { ex: 0, ey: 0, ez: 0 };

    pub fn new(ex: u32, ey: u32, ez: u32) -> Self {
        Monomial { ex, ey, ez }
    }

    pub fn of(var: Var) -> Self {
        match var {
            Var::X => Monomial::new(1, 0, 0),
            Var::Y => Monomial::new(0, 1, 0),
            Var::Z => Monomial::new(0, 0, 1),
        }
    }

    pub fn degree(&self) -> u32 {
        self.ex + self.ey + self.ez
    }

    pub fn exponent(&self, var: Var) -> u32 {
        match var {
            Var::X => self.ex,
            Var::Y => self.ey,
            Var::Z => self.ez,
        }
    }

    fn checked_mul(&self, other: &Monomial) -> Result<Monomial, PolyError> {
        let m = Monomial::new(self.ex + other.ex, self.ey + other.ey, self.ez + other.ez);
        if m.degree() > MAX_DEGREE {
            return Err(PolyError::DegreeOverflow(m.degree()));
        }
        Ok(m)
    }

    /// `self / other` if `other` divides `self`.
    pub fn divide(&self, other: &Monomial) -> Option<Monomial> {
        Some(Monomial::new(
            self.ex.checked_sub(other.ex)?,
            self.ey.checked_sub(other.ey)?,
            self.ez.checked_sub(other.ez)?,
        ))
    }

    /// All monomials of total degree `lo..=hi`, ascending in graded lex order.
    pub fn all_up_to(lo: u32, hi: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in lo..=hi {
            for ex in 0..=d {
                for ey in 0..=(d - ex) {
                    out.push(Monomial::new(ex, ey, d - ex - ey));
                }
            }
        }
        out.sort();
        out
    }

    fn eval(&self, point: &[Rat; 3]) -> Rat {
        num_traits::pow(point[0].clone(), self.ex as usize)
            * num_traits::pow(point[1].clone(), self.ey as usize)
            * num_traits::pow(point[2].clone(), self.ez as usize)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then(self.ex.cmp(&other.ex))
            .then(self.ey.cmp(&other.ey))
            .then(self.ez.cmp(&other.ez))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for var in Var::ALL {
            let e = self.exponent(var);
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(var.name())?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly3 {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn one() -> Self {
        Poly3::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly3::term(c, Monomial::ONE)
    }

    pub fn from_int(c: i64) -> Self {
        Poly3::constant(Rat::from_integer(c.into()))
    }

    pub fn var(v: Var) -> Self {
        Poly3::term(Rat::one(), Monomial::of(v))
    }

    pub fn x() -> Self {
        Poly3::var(Var::X)
    }

    pub fn y() -> Self {
        Poly3::var(Var::Y)
    }

    pub fn z() -> Self {
        Poly3::var(Var::Z)
    }

    pub fn term(c: Rat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly3 { terms }
    }

    /// Builds a polynomial from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(iter: I) -> Result<Self, PolyError> {
        let mut p = Poly3::zero();
        for (m, c) in iter {
            if m.degree() > MAX_DEGREE {
                return Err(PolyError::DegreeOverflow(m.degree()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero polynomial and for nonzero constants.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Terms in ascending graded lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rat) -> Poly3 {
        if c.is_zero() {
            return Poly3::zero();
        }
        Poly3 {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    pub fn checked_mul(&self, other: &Poly3) -> Result<Poly3, PolyError> {
        let mut out = Poly3::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.checked_mul(m2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Poly3, PolyError> {
        let mut acc = Poly3::one();
        for _ in 0..n {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative.
    pub fn diff(&self, var: Var) -> Poly3 {
        let mut out = Poly3::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            match var {
                Var::X => dm.ex -= 1,
                Var::Y => dm.ey -= 1,
                Var::Z => dm.ez -= 1,
            }
            out.add_term(dm, c * Rat::from_integer(e.into()));
        }
        out
    }

    pub fn eval(&self, point: &[Rat; 3]) -> Rat {
        self.terms
            .iter()
            .fold(Rat::zero(), |acc, (m, c)| acc + c * m.eval(point))
    }

    pub fn eval_f64(&self, point: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.to_f64().unwrap_or(f64::NAN)
                    * point[0].powi(m.ex as i32)
                    * point[1].powi(m.ey as i32)
                    * point[2].powi(m.ez as i32)
            })
            .sum()
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a
    /// remainder. Multivariate division by leading terms in graded lex order.
    pub fn div_exact(&self, divisor: &Poly3) -> Option<Poly3> {
        let (lm, lc) = divisor.leading_term()?;
        let mut rem = self.clone();
        let mut quot = Poly3::zero();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.divide(lm)?;
            let qc = c / lc;
            let step = Poly3::term(qc.clone(), qm);
            rem = &rem - &step.checked_mul(divisor).ok()?;
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Positive rational `c` such that `self / c` has coprime integer
    /// coefficients. Zero for the zero polynomial.
    pub fn content(&self) -> Rat {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rat::zero();
        }
        Rat::new(num, den)
    }

    /// Content-free representative with a positive leading coefficient.
    pub fn primitive(&self) -> Poly3 {
        let Some((_, lc)) = self.leading_term() else {
            return Poly3::zero();
        };
        let mut c = self.content();
        if lc.is_negative() {
            c = -c;
        }
        self.scale(&c.recip())
    }
}

impl Add for &Poly3 {
    type Output = Poly3;
    fn add(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Neg for &Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        Poly3 {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

/// Panics if the product exceeds [`MAX_DEGREE`]; use [`Poly3::checked_mul`]
/// when the degrees are not known to be small.
impl Mul for &Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: &Poly3) -> Poly3 {
        self.checked_mul(rhs).expect("polynomial degree overflow")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Poly3 {
            type Output = Poly3;
            fn $method(self, rhs: Poly3) -> Poly3 {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        -&self
    }
}

fn fmt_magnitude(f: &mut fmt::Formatter<'_>, c: &Rat, m: &Monomial) -> fmt::Result {
    let is_const = m.degree() == 0;
    if c.is_one() && !is_const {
        return write!(f, "{m}");
    }
    match (c.is_integer(), is_const) {
        (true, true) => write!(f, "{}", c.numer()),
        (true, false) => write!(f, "{}*{m}", c.numer()),
        (false, true) => write!(f, "{}/{}", c.numer(), c.denom()),
        (false, false) => write!(f, "({}/{})*{m}", c.numer(), c.denom()),
    }
}

/// Canonical text: terms in descending graded lex order, e.g.
/// `y*z - (5/2)*x`. [`Poly3::parse`] reads it back exactly.
impl fmt::Display for Poly3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            fmt_magnitude(f, &c.abs(), m)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Poly3 {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Poly3::parse(s)
    }
}

/// Parses a decimal literal such as `-2.5`, `3/4`, or `1e-3` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Result<Rat, PolyError> {
    let err = |msg: &str| PolyError::Parse {
        pos: 0,
        msg: format!("{msg}: {s:?}"),
    };
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(n / d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = body[i + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("empty number"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("invalid digit"));
    }
    let digits: BigInt = format!("{int_part}{frac_part}0")
        .parse::<BigInt>()
        .map_err(|_| err("invalid number"))?
        / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rat::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rat::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

impl Poly3 {
    /// Parses expressions over `x`, `y`, `z` with `+ - * / ^`, parentheses,
    /// integer and decimal literals. Division is only allowed by nonzero
    /// constants.
    pub fn parse(s: &str) -> Result<Poly3, PolyError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn expr(&mut self) -> Result<Poly3, PolyError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly3, PolyError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    acc = acc.checked_mul(&rhs)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    if !rhs.is_constant() || rhs.is_zero() {
                        return Err(PolyError::BadDivisor);
                    }
                    acc = acc.scale(&rhs.coeff(&Monomial::ONE).recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Poly3, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let n: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.error("expected a non-negative integer exponent"))?;
            return base.pow(n);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly3, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Poly3::x())
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Poly3::y())
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Poly3::z())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                // scientific suffix, e.g. 1e-3
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    let digits_start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if self.pos == digits_start {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let value = parse_rational(text).map_err(|_| PolyError::Parse {
                    pos: start,
                    msg: format!("invalid number {text:?}"),
                })?;
                Ok(Poly3::constant(value))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

impl serde::Serialize for Poly3 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Poly3 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Poly3::parse(&text).map_err(serde::de::Error::custom)
    }
}
