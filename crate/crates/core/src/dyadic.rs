//! Exact dyadic rationals `num / 2^exp`.
//!
//! Every quantity that a decoder or encoder touches is a dyadic rational, so
//! all comparisons in the crate are exact. Values are kept normalised
//! (numerator odd, or zero with exponent zero), which makes equality
//! structural.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    /// Value is `num / 2^exp`; invariant: `exp == 0` or `num` is odd.
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        // Strip factors of two shared between numerator and denominator.
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64) as u32;
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: BigInt::from(n), exp: 0 }
    }

    /// `a / 2^k`.
    pub fn ratio(a: i64, k: u32) -> Self {
        Dyadic::new(BigInt::from(a), k)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: BigInt::one(), exp: k }
    }

    /// `2^k` for `k ≥ 0`.
    pub fn pow2(k: u32) -> Self {
        Dyadic { num: BigInt::one() << k, exp: 0 }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Divide by `2^k` exactly.
    pub fn shr(&self, k: u32) -> Self {
        Dyadic::new(self.num.clone(), self.exp + k)
    }

    /// Multiply by `2^k` exactly.
    pub fn shl(&self, k: u32) -> Self {
        if self.exp >= k {
            Dyadic { num: self.num.clone(), exp: self.exp - k }
        } else {
            Dyadic { num: self.num.clone() << (k - self.exp), exp: 0 }
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Numerator rescaled to denominator `2^exp`; requires `exp >= self.exp`.
    pub fn scaled_num(&self, exp: u32) -> BigInt {
        assert!(exp >= self.exp, "cannot rescale {self} to coarser denominator 2^{exp}");
        self.num.clone() << (exp - self.exp)
    }

    /// Nearest integer, ties toward zero: `round(±(n + 1/2)) = ±n`.
    pub fn round_half_toward_zero(&self) -> BigInt {
        let neg = self.num.is_negative();
        let a = self.num.abs();
        let q = &a >> self.exp;
        let r = a - (&q << self.exp);
        // Round up when the fractional part strictly exceeds 1/2.
        let up = (&r << 1u8) > (BigInt::one() << self.exp);
        let m = if up { q + 1 } else { q };
        if neg {
            -m
        } else {
            m
        }
    }

    /// Exact midpoint of two dyadics.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        (a.clone() + b.clone()).shr(1)
    }

    /// Approximate value for display purposes only.
    pub fn to_f64(&self) -> f64 {
        let mut n = self.num.clone();
        let mut e = self.exp as i64;
        // Keep the numerator in f64 range by shedding shared magnitude.
        while n.bits() > 52 {
            n >>= 16;
            e -= 16;
        }
        let nf = n.to_string().parse::<f64>().unwrap_or(0.0);
        nf / 2f64.powi(e as i32)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.scaled_num(exp).cmp(&other.scaled_num(exp))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new(self.scaled_num(exp) + rhs.scaled_num(exp), exp)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new(self.scaled_num(exp) - rhs.scaled_num(exp), exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::new(self.num * rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseDyadicError {
    #[error("malformed dyadic literal {0:?}; expected `a`, `a/2^k`, or `a/b` with b a power of two")]
    Malformed(String),
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    /// Accepts `a`, `a/2^k`, or `a/b` with `b` a power of two.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseDyadicError::Malformed(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Dyadic { num: n, exp: 0 })
            }
            Some((a, b)) => {
                let n = BigInt::from_str(a.trim()).map_err(|_| bad())?;
                let b = b.trim();
                if let Some(k) = b.strip_prefix("2^") {
                    let k: u32 = k.trim().parse().map_err(|_| bad())?;
                    Ok(Dyadic::new(n, k))
                } else {
                    let d = BigInt::from_str(b).map_err(|_| bad())?;
                    if d <= BigInt::zero() {
                        return Err(bad());
                    }
                    let tz = d.trailing_zeros().unwrap_or(0);
                    if (&d >> tz) != BigInt::one() {
                        return Err(bad());
                    }
                    Ok(Dyadic::new(n, tz as u32))
                }
            }
        }
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn normalisation_makes_equality_structural() {
        assert_eq!(d("4/2^3"), d("1/2^1"));
        assert_eq!(d("0/2^9"), Dyadic::zero());
        assert_eq!(d("6/2^1"), Dyadic::from_int(3));
    }

    #[test]
    fn arithmetic_is_exact() {
        assert_eq!(d("1/2^1") + d("1/2^2"), d("3/2^2"));
        assert_eq!(d("1/2^1") - d("3/2^2"), d("-1/2^2"));
        assert_eq!(d("3/2^2") * d("3/2^2"), d("9/2^4"));
        assert_eq!(d("1/2^3").shl(3), Dyadic::one());
        assert_eq!(Dyadic::one().shr(5), d("1/2^5"));
    }

    #[test]
    fn ordering_crosses_denominators() {
        assert!(d("1/2^2") < d("3/2^3"));
        assert!(d("-1/2^2") > d("-3/2^3"));
        assert_eq!(d("2/2^2").cmp(&d("1/2^1")), Ordering::Equal);
    }

    #[test]
    fn rounding_ties_toward_zero() {
        assert_eq!(d("3/2^1").round_half_toward_zero(), BigInt::from(1));
        assert_eq!(d("-3/2^1").round_half_toward_zero(), BigInt::from(-1));
        assert_eq!(d("5/2^2").round_half_toward_zero(), BigInt::from(1));
        assert_eq!(d("7/2^2").round_half_toward_zero(), BigInt::from(2));
        assert_eq!(d("-7/2^2").round_half_toward_zero(), BigInt::from(-2));
    }

    #[test]
    fn parse_accepts_plain_denominators() {
        assert_eq!(d("3/8"), d("3/2^3"));
        assert!("3/6".parse::<Dyadic>().is_err());
        assert!("x/2^3".parse::<Dyadic>().is_err());
    }
}
