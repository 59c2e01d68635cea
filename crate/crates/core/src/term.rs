//! Names, literals, exact rationals and time intervals.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("malformed term `{0}`: expected `prefix:local`")]
    Malformed(String),
    #[error("term `{0}` has an empty local name")]
    EmptyLocal(String),
    #[error("term `{0}` contains whitespace")]
    Whitespace(String),
}

/// A prefixed name. Prefixes are bound to exactly one namespace per graph, so
/// ordering and equality on `(prefix, local)` agree with the expanded names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    prefix: String,
    local: String,
}

impl Term {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Result<Self, TermError> {
        let prefix = prefix.into();
        let local = local.into();
        let shown = format!("{prefix}:{local}");
        if local.is_empty() {
            return Err(TermError::EmptyLocal(shown));
        }
        if prefix.chars().chain(local.chars()).any(char::is_whitespace) {
            return Err(TermError::Whitespace(shown));
        }
        if prefix.contains(':') {
            return Err(TermError::Malformed(shown));
        }
        Ok(Term { prefix, local })
    }

    pub(crate) fn builtin(prefix: &str, local: &str) -> Self {
        Term {
            prefix: prefix.to_string(),
            local: local.to_string(),
        }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local(&self) -> &str {
        &self.local
    }
}

impl FromStr for Term {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((prefix, local)) => Term::new(prefix, local),
            None => Err(TermError::Malformed(s.to_string())),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number `{0}`")]
pub struct NumberError(pub String);

/// Exact rational number, used for seconds, rates and decimal literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Whether the value has a finite decimal expansion.
    pub fn is_terminating(&self) -> bool {
        let mut d = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        while (&d % &two).is_zero() {
            d /= &two;
        }
        while (&d % &five).is_zero() {
            d /= &five;
        }
        d.is_one()
    }

    /// Lossy conversion for display only.
    pub fn to_f64(&self) -> f64 {
        use num::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn decimal_string(&self) -> String {
        let numer = self.0.numer();
        let denom = self.0.denom();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        let mut d = denom.clone();
        while (&d % &two).is_zero() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        let scale = twos.max(fives);
        let scaled = numer * num::pow(BigInt::from(10), scale as usize) / denom;
        if scale == 0 {
            return scaled.to_string();
        }
        let negative = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let scale = scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        format!("{}{int}.{frac}", if negative { "-" } else { "" })
    }
}

impl FromStr for Rational {
    type Err = NumberError;

    /// Accepts decimals with optional exponent (`-1.25e3`) and fractions (`1/3`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || NumberError(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = parse_integer(n).ok_or_else(err)?;
            let d: BigInt = parse_unsigned(d).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let (negative, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{int}{frac}");
        let mut value = BigRational::new(
            digits.parse::<BigInt>().map_err(|_| err())?,
            num::pow(BigInt::from(10), frac.len()),
        );
        if let Some(exp) = exponent {
            let exp: i32 = exp.parse().map_err(|_| err())?;
            if exp.unsigned_abs() > 4096 {
                return Err(err());
            }
            let factor = BigRational::from_integer(num::pow(BigInt::from(10), exp.unsigned_abs() as usize));
            value = if exp >= 0 { value * factor } else { value / factor };
        }
        if negative {
            value = -value;
        }
        Ok(Rational(value))
    }
}

fn parse_unsigned(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_integer(s: &str) -> Option<BigInt> {
    match s.strip_prefix('-') {
        Some(rest) => parse_unsigned(rest).map(|n| -n),
        None => parse_unsigned(s),
    }
}

impl fmt::Display for Rational {
    /// Terminating values print as decimals, others as `numer/denom`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_terminating() {
            f.write_str(&self.decimal_string())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl std::ops::Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl std::ops::Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        Rational(&self.0 / &rhs.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("interval end {end} precedes start {start}")]
pub struct IntervalError {
    pub start: Rational,
    pub end: Rational,
}

/// Closed interval of seconds; `end == None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeInterval {
    start: Rational,
    end: Option<Rational>,
}

impl TimeInterval {
    pub fn new(start: Rational, end: Option<Rational>) -> Result<Self, IntervalError> {
        if let Some(end) = &end {
            if end < &start {
                return Err(IntervalError {
                    start,
                    end: end.clone(),
                });
            }
        }
        Ok(TimeInterval { start, end })
    }

    pub fn bounded(start: Rational, end: Rational) -> Result<Self, IntervalError> {
        Self::new(start, Some(end))
    }

    pub fn from_start(start: Rational) -> Self {
        TimeInterval { start, end: None }
    }

    /// `[0, ∞)`, used where a process carries no interval.
    pub fn unbounded() -> Self {
        Self::from_start(Rational::zero())
    }

    pub fn start(&self) -> &Rational {
        &self.start
    }

    pub fn end(&self) -> Option<&Rational> {
        self.end.as_ref()
    }

    pub fn is_bounded(&self) -> bool {
        self.end.is_some()
    }

    pub fn contains(&self, t: &Rational) -> bool {
        &self.start <= t && self.end.as_ref().is_none_or(|e| t <= e)
    }

    /// Closed-interval overlap: the intervals share at least one instant.
    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        let a_before_b_ends = other.end.as_ref().is_none_or(|e| &self.start <= e);
        let b_before_a_ends = self.end.as_ref().is_none_or(|e| &other.start <= e);
        a_before_b_ends && b_before_a_ends
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &TimeInterval) -> TimeInterval {
        let start = self.start.clone().min(other.start.clone());
        let end = match (&self.end, &other.end) {
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
            _ => None,
        };
        TimeInterval { start, end }
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.end {
            Some(end) => write!(f, "[{},{}]", self.start, end),
            None => write!(f, "[{},]", self.start),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    String(String),
    Decimal(Rational),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Decimal(d) => write!(f, "{d}"),
        }
    }
}

/// Object position of an assertion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Term(Term),
    Literal(Literal),
}

impl Node {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Node::Term(t) => Some(t),
            Node::Literal(_) => None,
        }
    }

    pub fn string(s: impl Into<String>) -> Self {
        Node::Literal(Literal::String(s.into()))
    }
}

impl From<Term> for Node {
    fn from(t: Term) -> Self {
        Node::Term(t)
    }
}

impl From<&Term> for Node {
    fn from(t: &Term) -> Self {
        Node::Term(t.clone())
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Term(t) => t.fmt(f),
            Node::Literal(l) => l.fmt(f),
        }
    }
}
