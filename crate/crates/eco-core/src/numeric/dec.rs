//! 18-decimal fixed-point scalar with explicit rounding directions.
//!
//! `Dec` is the carrier for every monetary, token, and dimensionless quantity
//! in the engine. Values are stored as a signed 256-bit integer scaled by
//! 10^18, giving an integral range of ±10^27 with no silent wraparound:
//! every operation that can leave the representable range reports
//! [`NumericError::Overflow`].
//!
//! Addition and subtraction are exact in this representation. Multiplication,
//! division, and square root take a [`RoundDir`] and land within one unit in
//! the last place of the true result, on the stated side.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use bnum::cast::As;
use bnum::types::{I256, I512};

/// Number of fractional decimal digits carried by [`Dec`].
pub const DECIMALS: u32 = 18;

/// Raw scale factor, 10^18.
const ONE_RAW: I256 = I256::parse_str_radix("1000000000000000000", 10);
/// Largest representable raw magnitude: 10^27 * 10^18.
const LIMIT_RAW: I256 =
    I256::parse_str_radix("1000000000000000000000000000000000000000000000", 10);

const ONE_RAW_512: I512 = I512::parse_str_radix("1000000000000000000", 10);

/// Direction in which an inexact result is rounded.
///
/// `Down` never exceeds the exact real value and `Up` never undershoots it;
/// `Nearest` breaks ties away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundDir {
    Down,
    Up,
    Nearest,
}

/// Errors reported by the fixed-point and kernel layers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("value outside representable range")]
    Overflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("tolerance not met after {0} refinements")]
    ToleranceNotMet(u32),
    #[error("no sign change over bracket")]
    NoBracket,
    #[error("invalid decimal literal {0:?}")]
    Parse(String),
}

/// Fixed-point decimal: signed integer scaled by 10^18.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dec(I256);

impl Dec {
    pub const ZERO: Dec = Dec(I256::ZERO);
    pub const ONE: Dec = Dec(ONE_RAW);

    /// Smallest positive value, 10^-18.
    pub const ULP: Dec = Dec(I256::ONE);

    /// Builds a value from whole units.
    pub fn from_int(v: i64) -> Dec {
        Dec(v.as_::<I256>() * ONE_RAW)
    }

    /// Builds a value from a raw count of 10^-18 units.
    pub fn from_units(units: i128) -> Dec {
        Dec(units.as_::<I256>())
    }

    pub(crate) fn from_raw(raw: I256) -> Result<Dec, NumericError> {
        if raw.unsigned_abs() > LIMIT_RAW.unsigned_abs() {
            return Err(NumericError::Overflow);
        }
        Ok(Dec(raw))
    }

    pub(crate) fn raw(self) -> I256 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(self) -> Dec {
        Dec(self.0.abs())
    }

    pub fn min(self, other: Dec) -> Dec {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Dec) -> Dec {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn checked_add(self, rhs: Dec) -> Result<Dec, NumericError> {
        Dec::from_raw(self.0 + rhs.0)
    }

    pub fn checked_sub(self, rhs: Dec) -> Result<Dec, NumericError> {
        Dec::from_raw(self.0 - rhs.0)
    }

    /// `self * rhs`, rounded in `dir`.
    pub fn mul(self, rhs: Dec, dir: RoundDir) -> Result<Dec, NumericError> {
        let wide = self.0.as_::<I512>() * rhs.0.as_::<I512>();
        narrow(div_round_wide(wide, ONE_RAW_512, dir))
    }

    /// `self / rhs`, rounded in `dir`.
    pub fn div(self, rhs: Dec, dir: RoundDir) -> Result<Dec, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        let wide = self.0.as_::<I512>() * ONE_RAW_512;
        narrow(div_round_wide(wide, rhs.0.as_::<I512>(), dir))
    }

    /// `self * num / den` with a single rounding at the end.
    pub fn mul_div(self, num: Dec, den: Dec, dir: RoundDir) -> Result<Dec, NumericError> {
        if den.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        let wide = self.0.as_::<I512>() * num.0.as_::<I512>();
        narrow(div_round_wide(wide, den.0.as_::<I512>(), dir))
    }

    /// Square root, rounded in `dir`. Errors on negative input.
    pub fn sqrt(self, dir: RoundDir) -> Result<Dec, NumericError> {
        if self.is_negative() {
            return Err(NumericError::Domain("sqrt of negative value"));
        }
        // isqrt of raw * 10^18 yields the root at the same 10^-18 scale.
        let wide: num_bigint::BigUint = wide_to_biguint(self.0.as_::<I512>() * ONE_RAW_512);
        let root = wide.sqrt();
        let exact = &root * &root == wide;
        let adjusted = match dir {
            RoundDir::Down => root,
            RoundDir::Up => {
                if exact {
                    root
                } else {
                    root + 1u32
                }
            }
            RoundDir::Nearest => {
                // root is the floor; bump if the fractional part is >= 1/2,
                // i.e. if wide >= (root + 1/2)^2 = root^2 + root + 1/4.
                if exact || wide < (&root * &root + &root + 1u32) {
                    root
                } else {
                    root + 1u32
                }
            }
        };
        let digits = adjusted.to_string();
        let raw = I256::from_str(&digits).map_err(|_| NumericError::Overflow)?;
        Dec::from_raw(raw)
    }

    /// Lossy conversion for test oracles and plotting.
    pub fn to_f64(self) -> f64 {
        self.0.as_::<f64>() / 1e18
    }

    /// Builds a value from an `f64`, rounding in `dir`. Intended for
    /// quadrature oracles; magnitudes past ~10^20 are rejected.
    pub fn from_f64(v: f64, dir: RoundDir) -> Result<Dec, NumericError> {
        if !v.is_finite() {
            return Err(NumericError::Overflow);
        }
        let scaled = v * 1e18;
        if scaled.abs() >= i128::MAX as f64 {
            return Err(NumericError::Overflow);
        }
        let units = match dir {
            RoundDir::Down => scaled.floor(),
            RoundDir::Up => scaled.ceil(),
            RoundDir::Nearest => scaled.round(),
        };
        Ok(Dec::from_units(units as i128))
    }
}

fn narrow(wide: I512) -> Result<Dec, NumericError> {
    if wide.unsigned_abs() > LIMIT_RAW.as_::<I512>().unsigned_abs() {
        return Err(NumericError::Overflow);
    }
    Dec::from_raw(wide.as_::<I256>())
}

/// Truncating division corrected to the requested direction.
fn div_round_wide(n: I512, d: I512, dir: RoundDir) -> I512 {
    debug_assert!(!d.is_zero());
    let q = n / d;
    let r = n % d;
    if r.is_zero() {
        return q;
    }
    let quotient_positive = n.is_negative() == d.is_negative();
    match dir {
        RoundDir::Down => {
            if quotient_positive {
                q
            } else {
                q - I512::ONE
            }
        }
        RoundDir::Up => {
            if quotient_positive {
                q + I512::ONE
            } else {
                q
            }
        }
        RoundDir::Nearest => {
            let twice_rem = r.unsigned_abs() << 1u32;
            if twice_rem >= d.unsigned_abs() {
                if quotient_positive {
                    q + I512::ONE
                } else {
                    q - I512::ONE
                }
            } else {
                q
            }
        }
    }
}

fn limbs_to_biguint(limbs: &[u64]) -> num_bigint::BigUint {
    let mut bytes = Vec::with_capacity(limbs.len() * 8);
    for limb in limbs {
        bytes.extend_from_slice(&limb.to_le_bytes());
    }
    num_bigint::BigUint::from_bytes_le(&bytes)
}

pub(crate) fn wide_to_biguint(v: I512) -> num_bigint::BigUint {
    debug_assert!(!v.is_negative());
    limbs_to_biguint(v.unsigned_abs().digits())
}

pub(crate) fn raw_to_bigint(v: I256) -> num_bigint::BigInt {
    let mag = limbs_to_biguint(v.unsigned_abs().digits());
    if v.is_negative() {
        -num_bigint::BigInt::from(mag)
    } else {
        num_bigint::BigInt::from(mag)
    }
}

pub(crate) fn bigint_to_dec(v: &num_bigint::BigInt) -> Result<Dec, NumericError> {
    let raw = I256::from_str(&v.to_string()).map_err(|_| NumericError::Overflow)?;
    Dec::from_raw(raw)
}

impl Neg for Dec {
    type Output = Dec;

    fn neg(self) -> Dec {
        Dec(-self.0)
    }
}

impl fmt::Display for Dec {
    /// Canonical form: optional sign, integer part, and exactly 18 fractional
    /// digits. This is the journal and CSV wire format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.0.unsigned_abs();
        let int_part = mag / ONE_RAW.unsigned_abs();
        let frac_part = mag % ONE_RAW.unsigned_abs();
        let sign = if self.0.is_negative() { "-" } else { "" };
        write!(f, "{sign}{int_part}.{frac_part:0>18}")
    }
}

impl fmt::Debug for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dec({self})")
    }
}

impl FromStr for Dec {
    type Err = NumericError;

    /// Accepts `[-]digits[.digits]` with at most 18 fractional digits.
    fn from_str(s: &str) -> Result<Dec, NumericError> {
        let err = || NumericError::Parse(s.to_string());
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1i8, rest),
            None => (1i8, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_str, frac_str) = match body.split_once('.') {
            Some((i, fr)) => (i, fr),
            None => (body, ""),
        };
        if int_str.is_empty() && frac_str.is_empty() {
            return Err(err());
        }
        if frac_str.len() > DECIMALS as usize {
            return Err(err());
        }
        if !int_str.chars().all(|c| c.is_ascii_digit())
            || !frac_str.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let int_str = if int_str.is_empty() { "0" } else { int_str };
        let int_part = I256::from_str(int_str).map_err(|_| NumericError::Overflow)?;
        let mut frac_digits = String::from(frac_str);
        while frac_digits.len() < DECIMALS as usize {
            frac_digits.push('0');
        }
        let frac_part = I256::from_str(&frac_digits).map_err(|_| err())?;
        let int_scaled = int_part.checked_mul(ONE_RAW).ok_or(NumericError::Overflow)?;
        let raw = int_scaled + frac_part;
        Dec::from_raw(if sign < 0 { -raw } else { raw })
    }
}

impl serde::Serialize for Dec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Dec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Dec, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
