//! Number types used throughout the crate.
//!
//! Structure constants are always exact rationals. States and operators are
//! generic over [`Scalar`], which is implemented for `f64` (fast iteration),
//! [`Rational`] (exact iteration) and [`Surd`] (exact arithmetic in a real
//! quadratic field, needed for irrational fixed points).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Field-like scalar with an exact or literal sign test.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;

    fn as_f64(&self) -> f64;

    fn sign_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn sign_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Shorthand for `p/q` as a [`Rational`].
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as a [`Rational`].
pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Exact conversion of a finite `f64` (used when promoting float input).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational `{input}`: {reason}")]
pub struct RationalParseError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `p/q`, an integer, or a decimal such as `-0.125` or `2.5e-3`
/// into an exact rational. Decimals are converted digit by digit, never
/// through a float.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    let err = |reason| RationalParseError {
        input: text.to_string(),
        reason,
    };
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err("unexpected character"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err("no digits"))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= Rational::from_integer(pow);
    } else {
        value /= Rational::from_integer(pow);
    }
    Ok(if negative { -value } else { value })
}

/// Canonical text form: `p/q`, or `p` for integers. Parses back exactly.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt_exact(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

/// Rational approximation of `sqrt(q)` with absolute error below `10^-digits`.
pub fn rational_sqrt_approx(q: &Rational, digits: u32) -> Rational {
    assert!(!q.is_negative(), "square root of a negative rational");
    // floor(sqrt(q * 10^(2 digits))) / 10^digits, computed on integers.
    let scale = num_traits::pow(BigInt::from(10u32), digits as usize);
    let scaled = q * Rational::from_integer(&scale * &scale);
    let floor = scaled.numer() / scaled.denom();
    Rational::new(floor.sqrt(), scale)
}

/// Element `a + b·√r` of a real quadratic field, with `r ≥ 0` rational.
///
/// Values with `b = 0` are plain rationals and combine with any radicand.
/// Two irrational operands must live in the same field (radicands differing
/// by a rational square factor); mixing fields is a programming error and
/// panics. Surds built through [`Surd::sqrt`] never
/// carry a perfect-square radicand, so division is always well defined for
/// a non-zero divisor.
#[derive(Clone, Debug)]
pub struct Surd {
    a: Rational,
    b: Rational,
    r: Rational,
}

impl Surd {
    pub fn rational(a: Rational) -> Self {
        Surd {
            a,
            b: Rational::zero(),
            r: Rational::zero(),
        }
    }

    /// `a + b·√r`; collapses to a rational when `r` is a perfect square.
    pub fn new(a: Rational, b: Rational, r: Rational) -> Self {
        assert!(!r.is_negative(), "negative radicand");
        if b.is_zero() {
            return Surd::rational(a);
        }
        match rational_sqrt_exact(&r) {
            Some(root) => Surd::rational(a + b * root),
            None => Surd { a, b, r },
        }
    }

    /// `√r` as a surd.
    pub fn sqrt(r: &Rational) -> Self {
        Surd::new(Rational::zero(), Rational::one(), r.clone())
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn surd_part(&self) -> &Rational {
        &self.b
    }

    pub fn radicand(&self) -> &Rational {
        &self.r
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    /// Rewrites `self` over the radicand `r`, which works when `self.r / r`
    /// is a rational square.
    pub fn rebase(&self, r: &Rational) -> Option<Surd> {
        if self.b.is_zero() || &self.r == r {
            return Some(Surd {
                a: self.a.clone(),
                b: self.b.clone(),
                r: if self.b.is_zero() { Rational::zero() } else { r.clone() },
            });
        }
        if r.is_zero() {
            return None;
        }
        let k = rational_sqrt_exact(&(&self.r / r))?;
        Some(Surd {
            a: self.a.clone(),
            b: &self.b * k,
            r: r.clone(),
        })
    }

    /// Exact equality that also works across different radicand spellings
    /// of the same number.
    pub fn exact_eq(&self, other: &Surd) -> bool {
        if self.a != other.a {
            return false;
        }
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => true,
            (false, false) => {
                self.b.is_negative() == other.b.is_negative()
                    && &self.b * &self.b * &self.r == &other.b * &other.b * &other.r
            }
            _ => false,
        }
    }

    /// Brings both operands over a common radicand.
    fn align(self, other: Surd) -> (Surd, Surd, Rational) {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => {
                let r = other.r.clone();
                (self, other, r)
            }
            (_, true) => {
                let r = self.r.clone();
                (self, other, r)
            }
            _ if self.r == other.r => {
                let r = self.r.clone();
                (self, other, r)
            }
            _ => {
                let r = self.r.clone();
                let other = other.rebase(&r).expect("surds from different quadratic fields");
                (self, other, r)
            }
        }
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with b²r. Equality would make r a square.
        let a2 = &self.a * &self.a;
        let b2r = &self.b * &self.b * &self.r;
        if a2 > b2r {
            sa
        } else {
            sb
        }
    }

    /// Decimal approximation; the square root is resolved to 40 digits
    /// before rounding to `f64`.
    pub fn approx(&self) -> f64 {
        if self.is_rational() {
            return rational_to_f64(&self.a);
        }
        let root = rational_sqrt_approx(&self.r, 40);
        rational_to_f64(&(&self.a + &self.b * root))
    }

    fn conjugate(&self) -> Surd {
        Surd {
            a: self.a.clone(),
            b: -self.b.clone(),
            r: self.r.clone(),
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return f.write_str(&format_rational(&self.a));
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        let b = self.b.abs();
        let coeff = if b.is_one() {
            String::new()
        } else {
            format!("{}*", format_rational(&b))
        };
        if self.a.is_zero() {
            let lead = if self.b.is_negative() { "-" } else { "" };
            write!(f, "{lead}{coeff}sqrt({})", format_rational(&self.r))
        } else {
            write!(
                f,
                "{} {sign} {coeff}sqrt({})",
                format_rational(&self.a),
                format_rational(&self.r)
            )
        }
    }
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).signum() == Ordering::Equal
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let (lhs, rhs, r) = self.align(rhs);
        Surd::new(lhs.a + rhs.a, lhs.b + rhs.b, r)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        let (lhs, rhs, r) = self.align(rhs);
        Surd::new(lhs.a - rhs.a, lhs.b - rhs.b, r)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let (lhs, rhs, r) = self.align(rhs);
        let a = &lhs.a * &rhs.a + &lhs.b * &rhs.b * &r;
        let b = &lhs.a * &rhs.b + &lhs.b * &rhs.a;
        Surd::new(a, b, r)
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, rhs: Surd) -> Surd {
        if rhs.is_rational() {
            assert!(!rhs.a.is_zero(), "division by zero");
            let r = self.r.clone();
            return Surd::new(self.a / &rhs.a, self.b / &rhs.a, r);
        }
        let norm = &rhs.a * &rhs.a - &rhs.b * &rhs.b * &rhs.r;
        let num = self * rhs.conjugate();
        let r = num.r.clone();
        Surd::new(num.a / &norm, num.b / &norm, r)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            a: -self.a,
            b: -self.b,
            r: self.r,
        }
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(Rational::one())
    }
}

impl Scalar for Surd {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        Surd::rational(q.clone())
    }

    fn as_f64(&self) -> f64 {
        self.approx()
    }

    fn sign_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    fn sign_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("0.75").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1e2").unwrap(), int(100));
        // 0.1 is not the float 0.1
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
    }

    #[test]
    fn rejects_malformed_rationals() {
        for bad in ["", "1/0", "a", "1.2.3", "1/x", "--1", "e5"] {
            assert!(parse_rational(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn format_round_trips() {
        for q in [ratio(-7, 20), int(3), ratio(12, 25), int(0)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rational_sqrt_exact(&ratio(4, 9)), Some(ratio(2, 3)));
        assert_eq!(rational_sqrt_exact(&ratio(2, 9)), None);
        let approx = rational_sqrt_approx(&int(2), 40);
        let err = (&approx * &approx - int(2)).abs();
        assert!(err < ratio(1, 1_000_000_000_000_000_000) * ratio(1, 1_000_000_000_000_000_000));
    }

    #[test]
    fn surd_arithmetic_and_sign() {
        let s5 = Surd::sqrt(&int(5));
        let phi = (Surd::one() + s5.clone()) / Surd::rational(int(2));
        // phi² = phi + 1
        assert_eq!(phi.clone() * phi.clone(), phi.clone() + Surd::one());
        assert!(phi.sign_positive());
        // 2 - sqrt(5) < 0, 3 - sqrt(5) > 0
        assert!((Surd::rational(int(2)) - s5.clone()).sign_negative());
        assert!((Surd::rational(int(3)) - s5.clone()).sign_positive());
        let inv = Surd::one() / phi.clone();
        assert_eq!(inv, phi.clone() - Surd::one());
        assert!((phi.approx() - 1.618_033_988_749_895).abs() < 1e-15);
        // perfect-square radicands collapse
        assert!(Surd::sqrt(&ratio(9, 4)).is_rational());
    }
}
