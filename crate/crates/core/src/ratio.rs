//! Exact scalars: rationals and Gaussian rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar used by all algebraic modules.
pub type Q = BigRational;

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics on `d == 0`.
pub fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

/// Exact (dyadic) rational representation of a finite f64.
pub fn q_from_f64(x: f64) -> Option<Q> {
    BigRational::from_float(x)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parse `"n"` or `"n/d"` with optional leading sign.
pub fn parse_rational(s: &str) -> Result<Q, RationalParseError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let parse_int = |p: &str| -> Result<BigInt, RationalParseError> {
        p.parse::<BigInt>()
            .map_err(|_| RationalParseError::Malformed(s.to_string()))
    };
    match t.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(t)?)),
        Some((n, d)) => {
            let num = parse_int(n.trim())?;
            let den = parse_int(d.trim())?;
            if den.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Gaussian rational `re + im·i`, used for polarizations and the quantum
/// shift where complexified structure constants appear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QC {
    pub re: Q,
    pub im: Q,
}

impl QC {
    pub fn new(re: Q, im: Q) -> Self {
        QC { re, im }
    }

    pub fn from_q(re: Q) -> Self {
        QC { re, im: Q::zero() }
    }

    pub fn zero() -> Self {
        QC { re: Q::zero(), im: Q::zero() }
    }

    pub fn one() -> Self {
        QC { re: Q::one(), im: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QC { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Squared modulus `re² + im²`.
    pub fn norm_sq(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl Add for QC {
    type Output = QC;
    fn add(self, rhs: QC) -> QC {
        QC { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for QC {
    type Output = QC;
    fn sub(self, rhs: QC) -> QC {
        QC { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for QC {
    type Output = QC;
    fn mul(self, rhs: QC) -> QC {
        QC {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for QC {
    type Output = QC;
    fn div(self, rhs: QC) -> QC {
        let n = rhs.norm_sq();
        assert!(!n.is_zero(), "division by zero Gaussian rational");
        let c = rhs.conj();
        let p = self * c;
        QC { re: p.re / &n, im: p.im / &n }
    }
}

impl Neg for QC {
    type Output = QC;
    fn neg(self) -> QC {
        QC { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for QC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}
