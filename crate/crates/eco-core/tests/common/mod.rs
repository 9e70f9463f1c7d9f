//! Shared test oracles, independent of the library's computation paths.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use eco_core::{Dec, RoundDir};

/// Oracle precision: values are integers at scale 10^-28 with absolute error
/// below 3·10^-24 (series truncation only, no argument reduction).
pub const ORACLE_SCALE: u32 = 28;

pub fn ten_pow(exp: u32) -> BigInt {
    let mut v = BigInt::from(1u8);
    for _ in 0..exp {
        v *= 10u8;
    }
    v
}

fn dec_units(v: Dec) -> BigInt {
    // Dec's canonical string is sign + digits + '.' + 18 digits.
    let s = v.to_string().replace('.', "");
    s.parse().expect("canonical decimal")
}

/// Plain-Taylor ln(1+x) oracle at 10^-28, summed until the terms vanish.
///
/// Computed directly from the alternating series for x ≤ 1/2 and through
/// the exact mirror `ln(1+x) = −ln(1 + (−x/(1+x)))` above that, so it shares
/// no argument-reduction machinery with the production kernel (which halves
/// with integer square roots).
pub fn oracle_ln1p(x: Dec) -> BigInt {
    assert!(x > -Dec::ONE, "oracle domain");
    if x.is_zero() {
        return BigInt::zero();
    }
    let one18 = ten_pow(18);
    let x_num = dec_units(x);
    let half = Dec::ONE.div(Dec::from_int(2), RoundDir::Nearest).unwrap();
    // The mirror w = −x/(1+x) shrinks large positive arguments (|w| < 1)
    // but expands negative ones, so it is only taken for x > 1/2.
    if x <= half {
        series_ln1p(&x_num, &one18)
    } else {
        let w_num = -&x_num * &one18;
        let w_den = &one18 * (&one18 + &x_num);
        -series_ln1p(&w_num, &w_den)
    }
}

/// Σ (−1)^{n+1} u^n / n at ORACLE_SCALE for rational u = num/den, |u| < 1.
fn series_ln1p(num: &BigInt, den: &BigInt) -> BigInt {
    let scale = ten_pow(ORACLE_SCALE);
    let u = num * &scale / den; // one truncation
    let mut term = u.clone();
    let mut sum = u.clone();
    let mut n = BigInt::from(2u8);
    let one = BigInt::from(1u8);
    loop {
        term = &term * &u / &scale;
        if term.is_zero() {
            break;
        }
        // (−1)^{n+1} u^n / n: the sign alternates with the power.
        let contribution = &term / &n;
        if (&n % 2u8).is_zero() {
            sum -= contribution;
        } else {
            sum += contribution;
        }
        n += &one;
    }
    sum
}

/// Lifts a Dec onto the oracle scale for comparisons.
pub fn to_oracle_units(v: Dec) -> BigInt {
    dec_units(v) * ten_pow(ORACLE_SCALE - 18)
}

/// Absolute slack covering oracle truncation when comparing against it:
/// the slow series near x = −0.99 runs to ~7500 terms with ≤2 units of
/// truncation each, so 3·10^-24 dominates every case.
pub fn oracle_slack() -> BigInt {
    BigInt::from(3u8) * ten_pow(4)
}

#[allow(dead_code)]
pub fn dec(s: &str) -> Dec {
    s.parse().unwrap()
}
