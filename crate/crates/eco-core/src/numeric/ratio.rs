//! Exact-rational helpers shared by the ln kernel and the quoting pipeline.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Signed};

use super::dec::{bigint_to_dec, raw_to_bigint, Dec, NumericError, RoundDir, DECIMALS};

pub(crate) fn ten_pow(exp: u32) -> BigInt {
    BigInt::from(10u8).pow(exp)
}

/// Floor division, `d > 0`.
pub(crate) fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    n.div_floor(d)
}

/// Ceiling division, `d > 0`.
pub(crate) fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    n.div_ceil(d)
}

/// Nearest division with ties away from zero, `d > 0`.
pub(crate) fn nearest_div(n: &BigInt, d: &BigInt) -> BigInt {
    debug_assert!(d.is_positive());
    let (q, r) = n.div_rem(d);
    if (r.abs() * 2u8) >= *d {
        if n.is_negative() {
            q - 1u8
        } else {
            q + 1u8
        }
    } else {
        q
    }
}

pub(crate) fn directed_div(n: &BigInt, d: &BigInt, dir: RoundDir) -> BigInt {
    match dir {
        RoundDir::Down => floor_div(n, d),
        RoundDir::Up => ceil_div(n, d),
        RoundDir::Nearest => nearest_div(n, d),
    }
}

/// Exact rational view of a fixed-point value.
pub(crate) fn dec_to_ratio(v: Dec) -> BigRational {
    BigRational::new(raw_to_bigint(v.raw()), ten_pow(DECIMALS))
}

/// Rounds an exact rational onto the 10^-18 grid in the given direction.
pub(crate) fn ratio_to_dec(r: &BigRational, dir: RoundDir) -> Result<Dec, NumericError> {
    let scaled_num = r.numer() * ten_pow(DECIMALS);
    let units = directed_div(&scaled_num, r.denom(), dir);
    bigint_to_dec(&units)
}

pub(crate) fn ratio_from_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
