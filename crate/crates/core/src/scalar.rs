//! Scalar types the symbolic layer is generic over.
//!
//! Exact work (membership, base-variety pinning, the emptiness prover) runs on
//! [`Rational`]; the same polynomial code evaluates on `f64`/`f32` for
//! numerics and plotting.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational; the engine's exact scalar.
pub type Rational = BigRational;

/// Minimal numeric interface needed by polynomials and linear algebra.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + Debug + Display + Num + Signed + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact types answer `true`; floating types compare against a tolerance.
    fn is_exact() -> bool;
    fn approx_zero(&self) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.to_f64().abs() < 1e-12
        }
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

pub fn int(v: i64) -> Rational {
    Rational::from_i64(v)
}

/// Exact square root of a non-negative rational, when it exists.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(Rational::zero());
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Best rational approximation with bounded denominator (continued fractions).
pub fn rational_from_f64(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..40 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::zero();
    }
    Rational::new(BigInt::from(sign * p1), BigInt::from(q1))
}

pub fn one<S: Scalar>() -> S {
    S::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
        assert_eq!(rational_sqrt(&rat(-1, 1)), None);
    }

    #[test]
    fn continued_fraction_recovers_simple_ratios() {
        assert_eq!(rational_from_f64(0.75, 1000), rat(3, 4));
        assert_eq!(rational_from_f64(-1.5, 1000), rat(-3, 2));
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        raw.trim().parse().map_err(|_| serde::de::Error::custom(format!("bad rational `{raw}`")))
    }

    pub mod vec {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        use super::super::Rational;

        pub fn serialize<S: Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .into_iter()
                .map(|raw| raw.trim().parse().map_err(|_| serde::de::Error::custom(format!("bad rational `{raw}`"))))
                .collect()
        }
    }
}
