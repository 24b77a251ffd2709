//! Exact fractions.
//!
//! A thin newtype over [`num_rational::Ratio<i128>`]. Values are always kept
//! in lowest terms with a positive denominator, so structural equality is
//! numeric equality. Text form is `p/q` (or `p` for integers); decimals are
//! accepted on input and converted exactly (`0.1` is `1/10`).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Panics when `den` is zero.
    pub fn new(num: i128, den: i128) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn from_integer(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    /// `1 / n`.
    pub fn reciprocal_of(n: usize) -> Self {
        Rational::new(1, n as i128)
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn recip(self) -> Self {
        Rational(self.0.recip())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        num_traits::CheckedAdd::checked_add(&self.0, &rhs.0).map(Rational)
    }

    /// Smallest integer `c` with `c >= self * 2^64`, as used by the fork-count
    /// sampler. `None` when the product does not fit in 128 bits.
    pub fn scaled_ceil_u64_range(self) -> Option<i128> {
        let num = self.numer().checked_mul(1i128 << 64)?;
        let den = self.denom();
        let q = num.div_euclid(den);
        Some(if num.rem_euclid(den) == 0 { q } else { q + 1 })
    }

    /// Lossy conversion for display in plots; never used in comparisons.
    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i128> for Rational {
    fn from(n: i128) -> Self {
        Rational::from_integer(n)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    // i128 holds 38 decimal digits.
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    if digits.len() > 36 || frac_part.len() > 36 {
        return None;
    }
    let num: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let den = 10i128.checked_pow(frac_part.len() as u32)?;
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| err())?;
            let q: i128 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            return Ok(Rational::new(p, q));
        }
        parse_decimal(t).ok_or_else(err)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\", a decimal, or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v as i128))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v as i128))
            }

            // Floats go through their shortest round-trip decimal form, so a
            // literal `0.1` in a document becomes exactly 1/10.
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                let text = format!("{v}");
                parse_decimal(&text).ok_or_else(|| E::custom(format!("unrepresentable `{text}`")))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::ONE
    }
}
