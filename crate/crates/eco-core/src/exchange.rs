//! Mint/burn quoting against the allocative curve.
//!
//! Trades settle as areas under the curve: a mint of `x` tokens from supply
//! `s` costs the integral of `q` over `[s, s+x]`, and a burn is the same
//! integral with `x < 0`. For the linear base curve this integral has the
//! closed form
//!
//! ```text
//! m = θ/(τk) · [ x − ln(1 + τkx/(1+τks)) / (τk) ],   θ = (1−τ+τ·a)·k
//! ```
//!
//! which the engine evaluates in exact rational arithmetic around an
//! adaptive-precision ln kernel, then rounds onto the money grid so that the
//! trader never comes out ahead: payments round up, rewards round down,
//! minted tokens round down. Repeating a mint/burn pair therefore always
//! incurs positive friction.
//!
//! The cheap Taylor-remainder bounds (a reward floor for burns and a token
//! floor for mints) are exposed alongside the exact forms; they mirror what
//! gas-constrained contract code would ship and are guaranteed never to
//! exceed the exact values.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::curves::{allocative_price_ratio, AllocativeParams, CurveError};
use crate::numeric::ratio::{dec_to_ratio, ratio_from_int, ratio_to_dec, ten_pow};
use crate::numeric::{ln1p_fixed, Dec, NumericError, RoundDir};

/// How a quoted figure was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    GuaranteedLowerBound,
}

/// Result of a mint or burn computation: tokens moved, money moved, and
/// whether the figure is exact or a guaranteed bound. Signs agree — positive
/// for mints, negative for burns — unless the quote is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quote {
    pub tokens: Dec,
    pub money: Dec,
    pub exactness: Exactness,
}

impl Quote {
    pub fn new(tokens: Dec, money: Dec, exactness: Exactness) -> Result<Self, ExchangeError> {
        let sign_ok = (tokens.is_zero() && money.is_zero())
            || (tokens.is_positive() && money.is_positive())
            || (tokens.is_negative() && money.is_negative())
            || (tokens.is_positive() && money.is_zero()); // dust mint charged nothing
        if !sign_ok {
            return Err(ExchangeError::InvalidAmount("quote sign mismatch"));
        }
        Ok(Quote { tokens, money, exactness })
    }
}

/// Effective slope of the allocative integrand: `(1 − τ + τ·a)·k`.
///
/// (The appendix calls this θ; renamed to avoid colliding with the mint
/// algorithm's averaging weight.)
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaEff(pub Dec);

impl ThetaEff {
    pub fn compute(k: Dec, params: &AllocativeParams) -> Result<Self, ExchangeError> {
        let r = theta_ratio(k, params);
        Ok(ThetaEff(ratio_to_dec(&r, RoundDir::Nearest)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExchangeError {
    #[error("burn exceeds available supply")]
    BurnExceedsSupply,
    #[error("invalid amount: {0}")]
    InvalidAmount(&'static str),
    #[error("requested tolerance cannot be met on the 10^-18 grid")]
    ToleranceNotMet,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

fn theta_ratio(k: Dec, params: &AllocativeParams) -> BigRational {
    let tau = dec_to_ratio(params.tau());
    (BigRational::one() - &tau + &tau * dec_to_ratio(params.assessment())) * dec_to_ratio(k)
}

/// Decimal-digit upper bound on a positive rational's magnitude.
fn digits_upper(r: &BigRational) -> u32 {
    if r.numer().is_zero() {
        return 0;
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    if nb <= db {
        1
    } else {
        ((nb - db + 1) as u32 * 30103).div_ceil(100_000) + 1
    }
}

struct Integrand {
    theta: BigRational,
    tau_k: BigRational,
    one_plus_cs: BigRational,
}

impl Integrand {
    fn new(k: Dec, params: &AllocativeParams, s: Dec) -> Self {
        let tau_k = dec_to_ratio(params.tau()) * dec_to_ratio(k);
        let one_plus_cs = BigRational::one() + &tau_k * dec_to_ratio(s);
        Integrand { theta: theta_ratio(k, params), tau_k, one_plus_cs }
    }

    /// ln argument `u = τkx / (1 + τks)` for trade size `x`.
    fn ln_arg(&self, x: &BigRational) -> BigRational {
        &self.tau_k * x / &self.one_plus_cs
    }

    /// Linear term `θ/(τk) · x`.
    fn linear_term(&self, x: &BigRational) -> BigRational {
        &self.theta / &self.tau_k * x
    }

    /// ln multiplier `θ/(τk)²`.
    fn ln_multiplier(&self) -> BigRational {
        &self.theta / (&self.tau_k * &self.tau_k)
    }
}

/// Curve integral over `[s, s+x]`, correctly rounded in `dir`. Sign follows
/// `x`. The ln kernel precision adapts to the multiplier magnitude, and a
/// short escalation loop makes the grid rounding unambiguous.
fn integral_directed(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    x: Dec,
    dir: RoundDir,
) -> Result<Dec, ExchangeError> {
    let parts = Integrand::new(k, params, s);
    let x_r = dec_to_ratio(x);
    let u = parts.ln_arg(&x_r);
    if u <= ratio_from_int(-1) {
        // Can only trip on inputs already past the full-burn boundary.
        return Err(ExchangeError::BurnExceedsSupply);
    }
    let linear = parts.linear_term(&x_r);
    let mult = parts.ln_multiplier();
    let base_prec = 24 + digits_upper(&mult);
    if base_prec > 220 {
        return Err(ExchangeError::Numeric(NumericError::Overflow));
    }

    let mut fallback = None;
    for round in 0..3u32 {
        let prec = base_prec + 20 * round;
        let ln_units = ln1p_fixed(u.numer(), u.denom(), prec)?;
        let ln_mid = BigRational::new(ln_units, ten_pow(prec));
        let err = &mult * BigRational::new(BigInt::one(), ten_pow(prec));
        let mid = &linear - &mult * ln_mid;
        let lo = &mid - &err;
        let hi = &mid + &err;
        let r_lo = ratio_to_dec(&lo, dir)?;
        let r_hi = ratio_to_dec(&hi, dir)?;
        if r_lo == r_hi {
            return Ok(r_lo);
        }
        fallback = Some((lo, hi, mid));
    }
    // Direction-safe fallback; adds at most one extra ulp.
    let (lo, hi, mid) = fallback.expect("escalation ran");
    let safe = match dir {
        RoundDir::Down => ratio_to_dec(&lo, RoundDir::Down)?,
        RoundDir::Up => ratio_to_dec(&hi, RoundDir::Up)?,
        RoundDir::Nearest => ratio_to_dec(&mid, RoundDir::Nearest)?,
    };
    Ok(safe)
}

/// Mid-precision (uncertified) integral value for solver iterations.
fn integral_estimate(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    x: Dec,
) -> Result<BigRational, ExchangeError> {
    let parts = Integrand::new(k, params, s);
    let x_r = dec_to_ratio(x);
    let u = parts.ln_arg(&x_r);
    if u <= ratio_from_int(-1) {
        return Err(ExchangeError::BurnExceedsSupply);
    }
    let mult = parts.ln_multiplier();
    let prec = 30 + digits_upper(&mult);
    let ln_units = ln1p_fixed(u.numer(), u.denom(), prec)?;
    let ln_mid = BigRational::new(ln_units, ten_pow(prec));
    Ok(parts.linear_term(&x_r) - mult * ln_mid)
}

fn check_supply(s: Dec) -> Result<(), ExchangeError> {
    if s.is_negative() {
        return Err(ExchangeError::Curve(CurveError::NegativeSupply));
    }
    Ok(())
}

fn check_burn_size(s: Dec, x: Dec) -> Result<(), ExchangeError> {
    if !x.is_negative() {
        return Err(ExchangeError::InvalidAmount("burn size must be negative"));
    }
    if x < -s {
        return Err(ExchangeError::BurnExceedsSupply);
    }
    Ok(())
}

/// Exact cost of minting `x > 0` tokens from supply `s`, rounded up — the
/// payment never undercharges the curve area.
pub fn mint_cost_exact(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    x: Dec,
) -> Result<Dec, ExchangeError> {
    check_supply(s)?;
    if !x.is_positive() {
        return Err(ExchangeError::InvalidAmount("mint size must be positive"));
    }
    integral_directed(k, params, s, x, RoundDir::Up)
}

/// Exact burn settlement for `x ∈ [−s, 0)`: returns `m < 0` whose magnitude
/// (the reward) is rounded down — the reward never overpays the curve area.
pub fn burn_reward_exact(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    x: Dec,
) -> Result<Dec, ExchangeError> {
    check_supply(s)?;
    check_burn_size(s, x)?;
    // |m| rounded down is m rounded up (toward zero from below).
    integral_directed(k, params, s, x, RoundDir::Up)
}

/// Guaranteed reward floor for a burn (the cheap quadratic bound):
/// `θ/(1+τks) · max(0, s·|x| − x²/max(2, 1+τks))`, never above the exact
/// reward. The floor rises monotonically as `x` falls toward `−s`.
pub fn burn_reward_lower(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    x: Dec,
) -> Result<Dec, ExchangeError> {
    check_supply(s)?;
    check_burn_size(s, x)?;
    let parts = Integrand::new(k, params, s);
    let x_r = dec_to_ratio(x);
    let two = ratio_from_int(2);
    let divisor = if parts.one_plus_cs > two { parts.one_plus_cs.clone() } else { two };
    let core = dec_to_ratio(s) * x_r.abs() - &x_r * &x_r / divisor;
    if !core.is_positive() {
        return Ok(Dec::ZERO);
    }
    let bound = &parts.theta / &parts.one_plus_cs * core;
    Ok(ratio_to_dec(&bound, RoundDir::Down)?)
}

/// Guaranteed token floor for a mint paying `m > 0`:
/// `(1+τks)/2 · [√(s² + 4m/θ) − s]`, never above the exact token amount.
pub fn mint_tokens_lower(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    m: Dec,
) -> Result<Dec, ExchangeError> {
    check_supply(s)?;
    if !m.is_positive() {
        return Err(ExchangeError::InvalidAmount("payment must be positive"));
    }
    let parts = Integrand::new(k, params, s);
    let s_r = dec_to_ratio(s);
    let radicand = &s_r * &s_r + ratio_from_int(4) * dec_to_ratio(m) / &parts.theta;
    // Downward square root at 10^-40: floor-scale, integer sqrt.
    let sqrt_scale = 40u32;
    let scaled = radicand * BigRational::new(ten_pow(2 * sqrt_scale), BigInt::one());
    let floor_int = scaled.floor().to_integer();
    let root = floor_int.sqrt();
    let root_lo = BigRational::new(root, ten_pow(sqrt_scale));
    let bound = (BigRational::one() + &parts.tau_k * &s_r) / ratio_from_int(2) * (root_lo - s_r);
    if !bound.is_positive() {
        return Ok(Dec::ZERO);
    }
    Ok(ratio_to_dec(&bound, RoundDir::Down)?)
}

/// Exact mint inversion: the largest grid amount `x` whose up-rounded cost
/// stays within the payment, i.e. `max { x : mint_cost_exact(s, x) ≤ m }`.
///
/// Tokens round down — the trader is never over-credited — and the unspent
/// remainder `m − cost(x)` is below one price-scaled ulp. Any `tol` of at
/// least one token ulp is satisfied; finer tolerances are unreachable on the
/// grid and report [`ExchangeError::ToleranceNotMet`]. A zero result means
/// the payment cannot buy even one token ulp and is fully refundable.
pub fn mint_tokens_exact(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
    m: Dec,
    tol: Dec,
) -> Result<Dec, ExchangeError> {
    check_supply(s)?;
    if !m.is_positive() {
        return Err(ExchangeError::InvalidAmount("payment must be positive"));
    }
    if tol < Dec::ULP {
        return Err(ExchangeError::ToleranceNotMet);
    }

    let cost_fits = |x: Dec| -> Result<bool, ExchangeError> {
        Ok(mint_cost_exact(k, params, s, x)? <= m)
    };

    // Bracket [lo, hi] with cost(lo) ≤ m < cost(hi).
    let mut lo = mint_tokens_lower(k, params, s, m)?;
    if !lo.is_positive() {
        lo = Dec::ZERO;
    } else if !cost_fits(lo)? {
        // The real-valued bound is below the real root; after rounding it can
        // at most brush the boundary. Step back onto the feasible side.
        lo = Dec::ZERO;
    }
    let mut hi = lo.max(Dec::ONE);
    let mut doublings = 0u32;
    while cost_fits(hi)? {
        lo = hi;
        hi = hi.mul(Dec::from_int(2), RoundDir::Up)?;
        doublings += 1;
        if doublings > 128 {
            return Err(ExchangeError::Numeric(NumericError::Overflow));
        }
    }

    let m_ratio = dec_to_ratio(m);
    let mut iterations = 0u32;
    loop {
        let width = hi.checked_sub(lo)?;
        if width <= Dec::ULP {
            break;
        }
        iterations += 1;
        if iterations > 256 {
            return Err(ExchangeError::ToleranceNotMet);
        }
        // Newton proposal from the bracket midpoint, clamped strictly inside.
        let half = width.div(Dec::from_int(2), RoundDir::Down)?;
        let mid = lo.checked_add(half)?;
        let mut candidate = mid;
        if let Ok(estimate) = integral_estimate(k, params, s, mid) {
            let slope = allocative_price_ratio(k, params, s.checked_add(mid)?);
            if slope.is_positive() {
                let step = (estimate - &m_ratio) / slope;
                let next = dec_to_ratio(mid) - step;
                if let Ok(next_dec) = ratio_to_dec(&next, RoundDir::Nearest) {
                    if next_dec > lo && next_dec < hi {
                        candidate = next_dec;
                    }
                }
            }
        }
        if candidate <= lo || candidate >= hi {
            candidate = mid;
        }
        if candidate == lo {
            candidate = lo.checked_add(Dec::ULP)?;
        }
        if cost_fits(candidate)? {
            lo = candidate;
        } else {
            hi = candidate;
        }
    }
    Ok(lo)
}

/// Curve-area quote by adaptive quadrature; test oracle only, production
/// quoting never routes through here.
pub fn quote_by_quadrature<F>(curve: F, s: Dec, x: Dec, tol: Dec) -> Result<Dec, ExchangeError>
where
    F: Fn(f64) -> f64,
{
    check_supply(s)?;
    if x.is_zero() {
        return Ok(Dec::ZERO);
    }
    if x.is_positive() {
        Ok(crate::numeric::integrate(curve, s, s.checked_add(x)?, tol)?)
    } else {
        let v = crate::numeric::integrate(curve, s.checked_add(x)?, s, tol)?;
        Ok(-v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Dec {
        s.parse().unwrap()
    }

    fn params(a: &str, tau: &str) -> AllocativeParams {
        AllocativeParams::new(dec(a), dec(tau)).unwrap()
    }

    // Anchor family: k=1, τ=0.5, a=2.
    // 50-digit references (arbitrary-precision closed form + quadrature):
    //   ∫₀¹ q = 6(1/2 − ln 3/2) = 0.56720935135101370813192130721390518056805745922503
    //   ∫₀² q = 6(1 − ln 2)     = 1.8411169166403281434966072712509405915469991938385

    #[test]
    fn mint_cost_anchor() {
        let m = mint_cost_exact(dec("1"), &params("2", "0.5"), Dec::ZERO, Dec::ONE).unwrap();
        assert_eq!(m, dec("0.567209351351013709")); // rounded up
        let m2 = mint_cost_exact(dec("1"), &params("2", "0.5"), Dec::ZERO, dec("2")).unwrap();
        assert_eq!(m2, dec("1.841116916640328144"));
    }

    #[test]
    fn mint_cost_rounds_up_and_reward_rounds_down() {
        let k = dec("1");
        let p = params("2", "0.5");
        let cost = mint_cost_exact(k, &p, Dec::ZERO, Dec::ONE).unwrap();
        let reward = -burn_reward_exact(k, &p, Dec::ONE, -Dec::ONE).unwrap();
        // Same real-valued area; directed rounding must straddle it.
        assert_eq!(reward, dec("0.567209351351013708"));
        assert_eq!(cost.checked_sub(reward).unwrap(), Dec::ULP);
    }

    #[test]
    fn mint_cost_validates() {
        let p = params("2", "0.5");
        assert!(matches!(
            mint_cost_exact(dec("1"), &p, Dec::ZERO, Dec::ZERO),
            Err(ExchangeError::InvalidAmount(_))
        ));
        assert!(matches!(
            mint_cost_exact(dec("1"), &p, dec("-1"), Dec::ONE),
            Err(ExchangeError::Curve(CurveError::NegativeSupply))
        ));
    }

    #[test]
    fn burn_reward_anchor_and_bounds() {
        let k = dec("1");
        let p = params("2", "0.5");
        let m = burn_reward_exact(k, &p, dec("2"), dec("-2")).unwrap();
        assert_eq!(m, dec("-1.841116916640328143"));
        assert!(matches!(
            burn_reward_exact(k, &p, Dec::ONE, dec("-1.000000000000000001")),
            Err(ExchangeError::BurnExceedsSupply)
        ));
        assert!(matches!(
            burn_reward_exact(k, &p, Dec::ONE, Dec::ONE),
            Err(ExchangeError::InvalidAmount(_))
        ));
    }

    #[test]
    fn burn_lower_bound_hand_values() {
        let k = dec("1");
        let p = params("2", "0.5");
        // s=1, x=−1: 1.5/1.5 · (1 − 1/2) = 0.5, below the exact 0.567209…
        assert_eq!(burn_reward_lower(k, &p, Dec::ONE, -Dec::ONE).unwrap(), dec("0.5"));
        // s=4, x=−1: 1.5/3 · (4 − 1/3) = 1.8333…
        assert_eq!(
            burn_reward_lower(k, &p, dec("4"), -Dec::ONE).unwrap(),
            dec("1.833333333333333333")
        );
        let exact = -burn_reward_exact(k, &p, dec("4"), -Dec::ONE).unwrap();
        assert!(dec("1.833333333333333333") <= exact);
        // x → 0⁻ vanishes
        let tiny = burn_reward_lower(k, &p, Dec::ONE, -Dec::ULP).unwrap();
        assert!(tiny <= Dec::ULP);
    }

    #[test]
    fn mint_tokens_lower_hand_value() {
        let k = dec("1");
        let p = params("2", "0.5");
        let m = dec("0.567209351351013709");
        // 0.5·√(4m/1.5); 50-digit reference at exact m is
        // 0.61493053881502947526707032119169812745810450490854
        let bound = mint_tokens_lower(k, &p, Dec::ZERO, m).unwrap();
        assert_eq!(bound, dec("0.614930538815029475"));
        let exact = mint_tokens_exact(k, &p, Dec::ZERO, m, Dec::ULP).unwrap();
        assert_eq!(exact, Dec::ONE);
        assert!(bound <= exact);
        // m → 0⁺ collapses to zero tokens
        assert_eq!(mint_tokens_lower(k, &p, dec("5"), Dec::ULP).unwrap(), Dec::ZERO);
    }

    #[test]
    fn mint_inversion_round_trip() {
        let k = dec("1.3");
        let p = params("1.7", "0.31");
        for xs in ["0.25", "1", "17.5", "300"] {
            let x = dec(xs);
            let cost = mint_cost_exact(k, &p, dec("2"), x).unwrap();
            let back = mint_tokens_exact(k, &p, dec("2"), cost, Dec::ULP).unwrap();
            // back is the largest grid x with cost ≤ m, so it can sit at most
            // a hair above the original; never below.
            assert!(back >= x, "{back} < {x}");
            let overshoot = back.checked_sub(x).unwrap();
            assert!(overshoot <= dec("0.000000000000000010"), "overshoot {overshoot}");
            assert!(mint_cost_exact(k, &p, dec("2"), back).unwrap() <= cost);
        }
    }

    #[test]
    fn mint_inversion_dust_payment() {
        // Spot price ~2.5 at s=10, so a 2-ulp payment cannot afford one token
        // ulp: the result is zero and the payment is fully refundable.
        let k = dec("1");
        let p = params("2", "0.5");
        let x = mint_tokens_exact(k, &p, dec("10"), Dec::from_units(2), Dec::ULP).unwrap();
        assert_eq!(x, Dec::ZERO);
    }

    #[test]
    fn mint_inversion_rejects_subgrid_tolerance() {
        let k = dec("1");
        let p = params("2", "0.5");
        assert!(matches!(
            mint_tokens_exact(k, &p, Dec::ZERO, Dec::ONE, Dec::ZERO),
            Err(ExchangeError::ToleranceNotMet)
        ));
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let k = dec("1");
        let p = params("2", "0.5");
        let oracle = quote_by_quadrature(
            |z| 1.5 * z / (1.0 + 0.5 * z),
            Dec::ZERO,
            Dec::ONE,
            dec("0.000000000001"),
        )
        .unwrap();
        let exact = mint_cost_exact(k, &p, Dec::ZERO, Dec::ONE).unwrap();
        let gap = oracle.checked_sub(exact).unwrap().abs();
        assert!(gap < dec("0.000000000002"), "gap {gap}");
        // Pure bonding curve triangle: ∫₀² kζ = 2 for k=1.
        let tri = quote_by_quadrature(|z| z, Dec::ZERO, dec("2"), dec("0.000000000001")).unwrap();
        assert!(tri.checked_sub(dec("2")).unwrap().abs() < dec("0.000000000002"));
        assert_eq!(
            quote_by_quadrature(|z| z, dec("3"), Dec::ZERO, Dec::ULP).unwrap(),
            Dec::ZERO
        );
    }

    #[test]
    fn tiny_tau_stays_accurate() {
        // τ = 1e-9 approximates the bare bonding curve: ∫₀² kζ dζ = 2.
        let k = dec("1");
        let p = params("2", "0.000000001");
        let cost = mint_cost_exact(k, &p, Dec::ZERO, dec("2")).unwrap();
        let gap = cost.checked_sub(dec("2")).unwrap().abs();
        // First-order correction is τ(a−1)·∫p − τ·∫p² ≈ 2τ·(a−1) − (8/3)τ.
        assert!(gap < dec("0.000000002"), "cost {cost}");
        let reward = -burn_reward_exact(k, &p, dec("2"), dec("-2")).unwrap();
        assert!(reward <= cost);
        assert!(cost.checked_sub(reward).unwrap() <= dec("0.000000000000000002"));
    }

    #[test]
    fn theta_eff_positive() {
        let t = ThetaEff::compute(dec("1"), &params("2", "0.5")).unwrap();
        assert_eq!(t.0, dec("1.5"));
    }

    #[test]
    fn quote_sign_invariant() {
        assert!(Quote::new(Dec::ONE, Dec::ONE, Exactness::Exact).is_ok());
        assert!(Quote::new(-Dec::ONE, -Dec::ONE, Exactness::Exact).is_ok());
        assert!(Quote::new(Dec::ZERO, Dec::ZERO, Exactness::Exact).is_ok());
        assert!(Quote::new(Dec::ONE, -Dec::ONE, Exactness::Exact).is_err());
        assert!(Quote::new(-Dec::ONE, Dec::ONE, Exactness::GuaranteedLowerBound).is_err());
    }
}
