//! Exact dyadic rationals `p / 2^k`.
//!
//! Every coefficient that the MK recursion produces is of this form, and so
//! is every classical bound (a signed sum of coefficients). Keeping them exact
//! lets bound comparisons be bit-exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// `numerator / 2^log2_denominator`, kept canonical: when the denominator
/// exponent is positive the numerator is odd, and zero is `0/2^0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic", into = "RawDyadic")]
pub struct Dyadic {
    numerator: i64,
    log2_denominator: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDyadic {
    numerator: i64,
    log2_denominator: u32,
}

impl TryFrom<RawDyadic> for Dyadic {
    type Error = Error;
    fn try_from(raw: RawDyadic) -> Result<Self, Error> {
        Dyadic::checked_new(raw.numerator as i128, raw.log2_denominator)
    }
}

impl From<Dyadic> for RawDyadic {
    fn from(d: Dyadic) -> Self {
        RawDyadic {
            numerator: d.numerator,
            log2_denominator: d.log2_denominator,
        }
    }
}

const MAX_LOG2: u32 = 62;

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        numerator: 0,
        log2_denominator: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        numerator: 1,
        log2_denominator: 0,
    };
    pub const HALF: Dyadic = Dyadic {
        numerator: 1,
        log2_denominator: 1,
    };

    pub fn new(numerator: i64, log2_denominator: u32) -> Self {
        Self::checked_new(numerator as i128, log2_denominator)
            .expect("dyadic out of representable range")
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(v, 0)
    }

    fn checked_new(mut num: i128, mut k: u32) -> Result<Self, Error> {
        if num == 0 {
            return Ok(Self::ZERO);
        }
        while k > 0 && num % 2 == 0 {
            num /= 2;
            k -= 1;
        }
        if k > MAX_LOG2 {
            return Err(Error::invalid(format!(
                "dyadic denominator 2^{k} exceeds 2^{MAX_LOG2}"
            )));
        }
        let numerator =
            i64::try_from(num).map_err(|_| Error::invalid("dyadic numerator overflows i64"))?;
        Ok(Dyadic {
            numerator,
            log2_denominator: k,
        })
    }

    pub fn numerator(self) -> i64 {
        self.numerator
    }

    pub fn log2_denominator(self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn abs(self) -> Self {
        Dyadic {
            numerator: self.numerator.abs(),
            ..self
        }
    }

    pub fn signum(self) -> i64 {
        self.numerator.signum()
    }

    /// Numerator after rescaling to the denominator `2^k`. `k` must be at
    /// least this value's own exponent.
    pub fn scaled_numerator(self, k: u32) -> i64 {
        assert!(k >= self.log2_denominator && k <= MAX_LOG2);
        self.numerator << (k - self.log2_denominator)
    }

    /// Inverse of [`Dyadic::scaled_numerator`].
    pub fn from_scaled(numerator: i64, k: u32) -> Self {
        Self::new(numerator, k)
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / (self.log2_denominator as f64).exp2()
    }

    /// Returns `Some(e)` when the value is exactly `2^e`.
    pub fn log2_exact(self) -> Option<i32> {
        if self.numerator <= 0 {
            return None;
        }
        let n = self.numerator as u64;
        n.is_power_of_two()
            .then(|| n.trailing_zeros() as i32 - self.log2_denominator as i32)
    }

    fn aligned(self, other: Self) -> (i128, i128, u32) {
        let k = self.log2_denominator.max(other.log2_denominator);
        let a = (self.numerator as i128) << (k - self.log2_denominator);
        let b = (other.numerator as i128) << (k - other.log2_denominator);
        (a, b, k)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Self) -> Self {
        let (a, b, k) = self.aligned(rhs);
        Self::checked_new(a + b, k).expect("dyadic overflow")
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Self {
        Dyadic {
            numerator: -self.numerator,
            ..self
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Self) -> Self {
        Self::checked_new(
            self.numerator as i128 * rhs.numerator as i128,
            self.log2_denominator + rhs.log2_denominator,
        )
        .expect("dyadic overflow")
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Dyadic::ZERO, |acc, x| acc + x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `p/2^k` (optionally signed) or a bare integer.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::invalid(format!("malformed dyadic `{s}`, expected p/2^k"));
        let (num, k) = match s.split_once('/') {
            Some((num, den)) => {
                let k = den.trim().strip_prefix("2^").ok_or_else(bad)?;
                (num.trim(), k.trim().parse::<u32>().map_err(|_| bad())?)
            }
            None => (s, 0),
        };
        let num = num.strip_prefix('+').unwrap_or(num);
        let num: i64 = num.parse().map_err(|_| bad())?;
        Self::checked_new(num as i128, k)
    }
}
