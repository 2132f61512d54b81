//! Exact numbers: small rationals for exponents and `Surd` for the positive
//! algebraic constants `x^(1/k)` that appear once `r^s` enters a ratio.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponents, slopes and thresholds.
pub type Rational = Ratio<i64>;

/// Parse `"p/q"`, an integer, or a finite decimal such as `"0.55"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::param(format!("cannot parse {s:?} as an exact rational"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: i64 = match int.trim_start_matches(['-', '+']) {
            "" => 0,
            d => d.parse().map_err(|_| bad())?,
        };
        let den = 10i64.pow(frac.len() as u32);
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac.parse::<i64>().ok()?)).ok_or_else(bad)?;
        return Ok(Rational::new(if neg { -num } else { num }, den));
    }
    s.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

pub fn fmt_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Same as [`rational_str`] for vectors.
pub mod rational_vec_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn pow_big(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

fn two_pow(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Floor of log2 of a positive big integer, plus the fractional part from
/// the leading 53 bits.
fn log2_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// A nonnegative real `radicand^(1/root)` with rational radicand.
///
/// Equality and ordering are numeric.
#[derive(Clone, Debug)]
pub struct Surd {
    radicand: BigRational,
    root: u32,
}

impl Surd {
    pub fn new(radicand: BigRational, root: u32) -> Self {
        assert!(root >= 1, "root must be positive");
        assert!(!radicand.is_negative(), "radicand must be nonnegative");
        let mut s = Surd { radicand, root };
        s.reduce();
        s
    }

    pub fn from_rational(r: BigRational) -> Self {
        Surd::new(r, 1)
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        Surd::new(BigRational::new(num.into(), den.into()), 1)
    }

    pub fn from_int(n: u64) -> Self {
        Surd::from_ratio(n, 1)
    }

    /// `2^e` for a rational exponent.
    pub fn pow2(e: Rational) -> Self {
        Surd::new(two_pow(*e.numer()), *e.denom() as u32)
    }

    /// `base^e` for a positive rational base.
    pub fn pow(base: &BigRational, e: Rational) -> Self {
        assert!(base.is_positive() || e.is_positive());
        let p = *e.numer();
        let mut x = pow_big(base, p.unsigned_abs() as u32);
        if p < 0 {
            x = x.recip();
        }
        Surd::new(x, *e.denom() as u32)
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_rational(&self) -> bool {
        self.root == 1
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.radicand)
    }

    // Pull exact k-th roots out of the radicand while the root allows it.
    fn reduce(&mut self) {
        if self.radicand.is_zero() {
            self.root = 1;
            return;
        }
        let mut p = 2u32;
        while self.root > 1 && p <= self.root {
            if self.root.is_multiple_of(p) {
                let n = self.radicand.numer().nth_root(p);
                let d = self.radicand.denom().nth_root(p);
                if num_traits::pow(n.clone(), p as usize) == *self.radicand.numer()
                    && num_traits::pow(d.clone(), p as usize) == *self.radicand.denom()
                {
                    self.radicand = BigRational::new(n, d);
                    self.root /= p;
                    continue;
                }
            }
            p += 1;
        }
    }

    pub fn recip(&self) -> Self {
        Surd::new(self.radicand.recip(), self.root)
    }

    pub fn mul(&self, other: &Surd) -> Self {
        let l = num_integer::lcm(self.root, other.root);
        let a = pow_big(&self.radicand, l / self.root);
        let b = pow_big(&other.radicand, l / other.root);
        Surd::new(a * b, l)
    }

    pub fn div(&self, other: &Surd) -> Self {
        self.mul(&other.recip())
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        self.mul(&Surd::from_rational(r.clone()))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        self.radicand.floor().to_integer().nth_root(self.root)
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        let f = self.floor();
        let back = BigRational::from_integer(num_traits::pow(f.clone(), self.root as usize));
        if back == self.radicand {
            f
        } else {
            f + 1
        }
    }

    pub fn log2_f64(&self) -> f64 {
        if self.radicand.is_zero() {
            return f64::NEG_INFINITY;
        }
        (log2_bigint(self.radicand.numer()) - log2_bigint(self.radicand.denom())) / self.root as f64
    }

    pub fn to_f64(&self) -> f64 {
        if self.radicand.is_zero() {
            0.0
        } else {
            self.log2_f64().exp2()
        }
    }

    pub fn max(self, other: Surd) -> Surd {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Surd {}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.root == other.root {
            return self.radicand.cmp(&other.radicand);
        }
        // a^(1/m) vs b^(1/n)  <=>  a^n vs b^m
        let a = pow_big(&self.radicand, other.root);
        let b = pow_big(&other.radicand, self.root);
        a.cmp(&b)
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Surd::from_rational(big(&r))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root == 1 {
            write!(f, "{}", self.radicand)
        } else {
            write!(f, "({})^(1/{})", self.radicand, self.root)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SurdRepr {
    radicand: String,
    root: u32,
    approx: f64,
}

impl Serialize for Surd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SurdRepr { radicand: self.radicand.to_string(), root: self.root, approx: self.to_f64() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Surd {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SurdRepr::deserialize(d)?;
        let radicand = BigRational::from_str(&r.radicand).map_err(serde::de::Error::custom)?;
        if radicand.is_negative() || r.root == 0 {
            return Err(serde::de::Error::custom("surd must be nonnegative with positive root"));
        }
        Ok(Surd::new(radicand, r.root))
    }
}

/// Exact `log2(n)` when `n` is a power of two.
pub fn exact_log2(n: u64) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

/// Sign of `x^a * y^b - 2^e` for positive integers `x, y` and rational
/// exponents, decided exactly.
pub fn cmp_power_product(x: u64, a: Rational, y: u64, b: Rational, e: Rational) -> Ordering {
    let lhs =
        Surd::pow(&BigRational::from_integer(x.into()), a).mul(&Surd::pow(&BigRational::from_integer(y.into()), b));
    lhs.cmp(&Surd::pow2(e))
}

pub(crate) fn bigint_to_u64(b: &BigInt) -> u64 {
    match b.sign() {
        Sign::Minus => 0,
        _ => b.to_u64().unwrap_or(u64::MAX),
    }
}
