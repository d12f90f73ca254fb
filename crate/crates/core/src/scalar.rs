//! Scalar backends and rational helpers.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Which arithmetic produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;
    fn additive_zero() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn from_f64_checked(x: f64) -> Result<Self>;
    fn is_exact_zero(&self) -> bool;
    fn as_f64(&self) -> f64;
    fn scale(&self, c: &Rational, cf: f64) -> Self;
    fn is_finite(&self) -> bool;
    /// `lambda^(num/den)`; the exact backend fails unless the result is rational.
    fn weight_power(lambda: &Self, num: u64, den: u64) -> Result<Self>;
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;
    fn additive_zero() -> Self {
        Zero::zero()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_f64_checked(x: f64) -> Result<Self> {
        Rational::from_float(x).ok_or(Error::NonFinite)
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn scale(&self, c: &Rational, _cf: f64) -> Self {
        self * c
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn weight_power(lambda: &Self, num: u64, den: u64) -> Result<Self> {
        let root = if den == 1 {
            lambda.clone()
        } else {
            exact_root(lambda, den)
                .ok_or_else(|| Error::Inexact(format!("{} is not a perfect {den}-th power", fmt_rational(lambda))))?
        };
        Ok(pow_rational(&root, num))
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;
    fn additive_zero() -> Self {
        0.0
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn from_f64_checked(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite)
        }
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn scale(&self, _c: &Rational, cf: f64) -> Self {
        self * cf
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn weight_power(lambda: &Self, num: u64, den: u64) -> Result<Self> {
        Ok(if den == 1 { lambda.powi(num as i32) } else { lambda.powf(num as f64 / den as f64) })
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    // Shift both parts down to 64 significant bits first.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (q.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((ns - ds) as i32)
}

pub fn pow_rational(q: &Rational, e: u64) -> Rational {
    num_traits::pow::pow(q.clone(), e as usize)
}

/// Exact n-th root of a nonnegative rational, if it is rational.
pub fn exact_root(q: &Rational, n: u64) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    if n == 1 {
        return Some(q.clone());
    }
    let n32 = u32::try_from(n).ok()?;
    let a = q.numer().nth_root(n32);
    let b = q.denom().nth_root(n32);
    if num_traits::pow::pow(a.clone(), n as usize) == *q.numer()
        && num_traits::pow::pow(b.clone(), n as usize) == *q.denom()
    {
        Some(Rational::new(a, b))
    } else {
        None
    }
}

/// Parse `p/q`, an integer, or a finite decimal such as `0.9` or `-1.25e-3`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(digits);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Round `x` to the dyadic grid `k / 2^bits` (toward the nearest point).
pub fn dyadic_round(x: f64, bits: u32) -> Rational {
    let k = (x * 2f64.powi(bits as i32)).round();
    dyadic(k, bits)
}

pub fn dyadic_ceil(x: f64, bits: u32) -> Rational {
    dyadic((x * 2f64.powi(bits as i32)).ceil(), bits)
}

fn dyadic(k: f64, bits: u32) -> Rational {
    let num = Rational::from_float(k).expect("finite dyadic numerator");
    num / Rational::from_integer(BigInt::one() << bits as usize)
}

/// Smallest dyadic `k / 2^bits >= q`.
pub fn ceil_to_dyadic(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let scaled = q * Rational::from_integer(scale.clone());
    Rational::new(scaled.ceil().to_integer(), scale)
}

/// Largest dyadic `k / 2^bits <= q`.
pub fn floor_to_dyadic(q: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let scaled = q * Rational::from_integer(scale.clone());
    Rational::new(scaled.floor().to_integer(), scale)
}

/// Rational enclosure `lo <= sqrt(q) <= hi` with `hi - lo <= 2^-bits`.
pub fn sqrt_enclosure(q: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    let scale = BigInt::one() << (2 * bits as usize);
    let scaled = (q * Rational::from_integer(scale)).floor().to_integer();
    let s = scaled.sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = Rational::new(s.clone(), den.clone());
    let exact = &s * &s == scaled && lo.clone() * lo.clone() == *q;
    let hi = if exact { lo.clone() } else { Rational::new(s + 1, den) };
    (lo, hi)
}

/// `x` rounded to `bits` significant binary digits, as an exact dyadic rational.
pub fn round_significant(x: f64, bits: u32) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    if x == 0.0 {
        return Ok(Rational::zero());
    }
    let shift = bits as i32 - 1 - x.abs().log2().floor() as i32;
    let k = Rational::from_float((x * 2f64.powi(shift.clamp(-1000, 1000))).round()).ok_or(Error::NonFinite)?;
    let two = Rational::from_integer(BigInt::from(2));
    Ok(if shift >= 0 { k / num_traits::pow(two, shift as usize) } else { k * num_traits::pow(two, (-shift) as usize) })
}

pub fn sign_of(q: &Rational) -> i8 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn lcm_of_denominators<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("0.9").unwrap(), rat(9, 10));
        assert_eq!(parse_rational("1.9").unwrap(), rat(19, 10));
        assert_eq!(parse_rational("-1.25e-1").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational("2e3").unwrap(), int(2000));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn format_round_trip() {
        for q in [rat(1, 3), int(0), int(-4), rat(-22, 7)] {
            assert_eq!(parse_rational(&fmt_rational(&q)).unwrap(), q);
        }
    }

    #[test]
    fn roots() {
        assert_eq!(exact_root(&rat(9, 4), 2), Some(rat(3, 2)));
        assert_eq!(exact_root(&rat(8, 27), 3), Some(rat(2, 3)));
        assert_eq!(exact_root(&int(2), 2), None);
        assert_eq!(Rational::weight_power(&int(4), 3, 2).unwrap(), int(8));
        assert!(Rational::weight_power(&int(2), 3, 2).is_err());
    }

    #[test]
    fn sqrt_bounds() {
        let (lo, hi) = sqrt_enclosure(&int(2), 40);
        assert!(&lo * &lo <= int(2) && &hi * &hi >= int(2));
        assert!(&hi - &lo <= rat(1, 1 << 30));
        let (lo, hi) = sqrt_enclosure(&rat(9, 16), 10);
        assert_eq!(lo, rat(3, 4));
        assert_eq!(hi, rat(3, 4));
    }

    #[test]
    fn huge_rational_to_float() {
        let big = Rational::new(BigInt::one() << 2000usize, (BigInt::one() << 1999usize) * 3);
        assert!((rational_to_f64(&big) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_grid() {
        assert_eq!(ceil_to_dyadic(&rat(1, 3), 2), rat(1, 2));
        assert_eq!(floor_to_dyadic(&rat(1, 3), 2), rat(1, 4));
        assert_eq!(dyadic_round(0.3, 4), rat(5, 16));
        assert_eq!(dyadic_ceil(0.3, 4), rat(5, 16));
    }
}
