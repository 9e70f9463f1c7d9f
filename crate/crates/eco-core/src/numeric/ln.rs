//! Guaranteed-accuracy natural-log kernel.
//!
//! `ln(1+u)` is the only transcendental the quoting engine needs. The kernel
//! takes `u` as an exact rational, reduces the argument toward 1 with integer
//! square roots (no stored constants), and sums the atanh-form series
//! `ln(y) = 2·(t + t³/3 + t⁵/5 + …)` with `t = (y−1)/(y+1)` in scaled
//! `BigInt` arithmetic with generous guard digits. Callers pick the output
//! precision; directed rounding onto the 10^-18 grid uses a small
//! escalation loop so the public `ln1p` is correctly rounded.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::dec::{bigint_to_dec, raw_to_bigint, Dec, NumericError, RoundDir, DECIMALS};
use super::ratio::{ceil_div, floor_div, nearest_div, ten_pow};

/// `ln(1+u)` for exact rational `u = u_num/u_den`, `u > -1`, as an integer at
/// scale 10^-prec with absolute error below one unit in that scale.
pub(crate) fn ln1p_fixed(
    u_num: &BigInt,
    u_den: &BigInt,
    prec: u32,
) -> Result<BigInt, NumericError> {
    debug_assert!(u_den.is_positive());
    let y_num = u_den + u_num; // 1 + u, exactly
    if !y_num.is_positive() {
        return Err(NumericError::Domain("ln1p requires an argument above -1"));
    }
    if y_num == *u_den {
        return Ok(BigInt::zero());
    }

    // Upper-bound the number of square-root halvings from the bit lengths:
    // |ln y| <= (|bits(num) - bits(den)| + 1) * ln 2.
    let bit_gap = (y_num.bits() as i64 - u_den.bits() as i64).unsigned_abs() + 1;
    let ln_bound_centi = bit_gap * 70 + 70; // 100 * |ln y| upper bound
    let mut halvings_cap = 0u32;
    // Reduce until |ln y| / 2^j <= ln(5/4) ~= 0.223.
    while ln_bound_centi >> halvings_cap > 22 {
        halvings_cap += 1;
    }
    halvings_cap += 2;

    // Guard digits: series truncation plus 2^j amplification of unit errors.
    let work = prec + 12 + (halvings_cap * 32).div_ceil(100);
    let scale = ten_pow(work);
    let mut y = nearest_div(&(y_num * &scale), u_den);

    let low = &scale * 3u8 / 4u8;
    let high = &scale * 5u8 / 4u8;
    let mut halvings = 0u32;
    while (y < low || y > high) && halvings < halvings_cap {
        y = (y * &scale).sqrt();
        halvings += 1;
    }
    debug_assert!(y >= low && y <= high, "argument reduction did not converge");

    // t = (y - 1) / (y + 1), |t| <= 1/7 after reduction.
    let t = nearest_div(&((&y - &scale) * &scale), &(&y + &scale));
    let t_sq = &t * &t / &scale;

    let mut term = t.clone();
    let mut sum = t;
    let mut odd = BigInt::from(3u8);
    let two = BigInt::from(2u8);
    loop {
        term = &term * &t_sq / &scale;
        if term.is_zero() {
            break;
        }
        sum += &term / &odd;
        odd += &two;
    }

    let unscaled = sum << (halvings + 1);
    Ok(nearest_div(&unscaled, &ten_pow(work - prec)))
}

/// `ln(1+x)` on the fixed-point grid, rounded in `dir` with error below one
/// unit in the last place on the stated side.
pub fn ln1p(x: Dec, dir: RoundDir) -> Result<Dec, NumericError> {
    if x <= -Dec::ONE {
        return Err(NumericError::Domain("ln1p requires an argument above -1"));
    }
    if x.is_zero() {
        return Ok(Dec::ZERO);
    }
    let num = raw_to_bigint(x.raw());
    let den = ten_pow(DECIMALS);

    // Ziv loop: widen the working precision until the ±1-unit uncertainty
    // interval rounds unambiguously onto the 10^-18 grid.
    let mut last = None;
    for prec in [38u32, 58, 88] {
        let mid = ln1p_fixed(&num, &den, prec)?;
        let grid = ten_pow(prec - DECIMALS);
        let lo = &mid - 1u8;
        let hi = &mid + 1u8;
        let (r_lo, r_hi) = match dir {
            RoundDir::Down => (floor_div(&lo, &grid), floor_div(&hi, &grid)),
            RoundDir::Up => (ceil_div(&lo, &grid), ceil_div(&hi, &grid)),
            RoundDir::Nearest => (nearest_div(&lo, &grid), nearest_div(&hi, &grid)),
        };
        if r_lo == r_hi {
            return bigint_to_dec(&r_lo);
        }
        last = Some((lo, hi, mid, grid));
    }
    // Never reached for 18-digit inputs in practice; fall back to the
    // direction-safe end of the final interval.
    let (lo, hi, mid, grid) = last.expect("escalation ran");
    let safe = match dir {
        RoundDir::Down => floor_div(&lo, &grid),
        RoundDir::Up => ceil_div(&hi, &grid),
        RoundDir::Nearest => nearest_div(&mid, &grid),
    };
    bigint_to_dec(&safe)
}
