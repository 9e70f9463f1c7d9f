//! Bonding and allocative curve evaluation, efficiency predicates, and the
//! tax-rate thresholds that trade investment efficiency against allocative
//! efficiency.
//!
//! The house bonding curve is linear, `p(s) = k·s`. Its allocative transform
//! for assessment `a` and tax rate `τ` is
//!
//! ```text
//! q(s) = (1 − τ + τ·a) · p(s) / (1 + τ·p(s))
//! ```
//!
//! which stays strictly below `a + (1−τ)/τ` for every supply, approaches `p`
//! as `τ → 0`, and is pinned near `a` as `τ → 1`.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::numeric::ratio::{dec_to_ratio, ratio_from_int, ratio_to_dec};
use crate::numeric::{Dec, NumericError, RoundDir};

/// Errors from curve construction and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("supply must be nonnegative")]
    NegativeSupply,
    #[error("invalid curve parameters: {0}")]
    InvalidParams(&'static str),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Linear bonding curve `p(s) = k·s`, `k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearBondingCurve {
    k: Dec,
}

impl LinearBondingCurve {
    pub fn new(k: Dec) -> Result<Self, CurveError> {
        if !k.is_positive() {
            return Err(CurveError::InvalidParams("slope k must be positive"));
        }
        Ok(LinearBondingCurve { k })
    }

    pub fn k(&self) -> Dec {
        self.k
    }

    /// `p(s) = k·s`, rounded to nearest.
    pub fn price(&self, s: Dec) -> Result<Dec, CurveError> {
        if s.is_negative() {
            return Err(CurveError::NegativeSupply);
        }
        Ok(self.k.mul(s, RoundDir::Nearest)?)
    }
}

/// Assessment and tax-rate pair that shapes an allocative curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocativeParams {
    a: Dec,
    tau: Dec,
}

impl AllocativeParams {
    /// Requires `a ≥ 0` and `τ` strictly inside `(0, 1)`.
    pub fn new(a: Dec, tau: Dec) -> Result<Self, CurveError> {
        if a.is_negative() {
            return Err(CurveError::InvalidParams("assessment must be nonnegative"));
        }
        if !tau.is_positive() || tau >= Dec::ONE {
            return Err(CurveError::InvalidParams("tax rate must lie strictly in (0,1)"));
        }
        Ok(AllocativeParams { a, tau })
    }

    pub fn assessment(&self) -> Dec {
        self.a
    }

    pub fn tau(&self) -> Dec {
        self.tau
    }

    /// Same tax rate, different assessment.
    pub fn with_assessment(&self, a: Dec) -> Result<Self, CurveError> {
        AllocativeParams::new(a, self.tau)
    }
}

/// Exact rational value of `q(s)` for a linear base curve.
pub(crate) fn allocative_price_ratio(
    k: Dec,
    params: &AllocativeParams,
    s: Dec,
) -> BigRational {
    let p = dec_to_ratio(k) * dec_to_ratio(s);
    let tau = dec_to_ratio(params.tau);
    let numer = (BigRational::one() - &tau + &tau * dec_to_ratio(params.a)) * &p;
    let denom = BigRational::one() + tau * p;
    numer / denom
}

/// `q(s)` on the grid, rounded to nearest.
pub fn price_allocative(
    curve: &LinearBondingCurve,
    params: &AllocativeParams,
    s: Dec,
) -> Result<Dec, CurveError> {
    if s.is_negative() {
        return Err(CurveError::NegativeSupply);
    }
    let q = allocative_price_ratio(curve.k, params, s);
    Ok(ratio_to_dec(&q, RoundDir::Nearest)?)
}

/// Strict upper bound of the allocative curve: `a + (1−τ)/τ`, rounded up so
/// it dominates every rounded `q(s)`.
pub fn allocative_sup(params: &AllocativeParams) -> Dec {
    let tau = dec_to_ratio(params.tau);
    let sup = dec_to_ratio(params.a) + (BigRational::one() - &tau) / tau;
    ratio_to_dec(&sup, RoundDir::Up).expect("sup within range for valid params")
}

/// A price-versus-supply function that the efficiency predicates can sample.
pub trait PriceCurve {
    /// Price at supply `s ≥ 0`. Panics if the price leaves the representable
    /// range; the engine's own curves stay well inside it.
    fn price_at(&self, s: Dec) -> Dec;

    /// Strictly increasing curves let the predicates check only `s = S`.
    fn is_monotone(&self) -> bool {
        false
    }
}

impl PriceCurve for LinearBondingCurve {
    fn price_at(&self, s: Dec) -> Dec {
        self.price(s).expect("price within range")
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Linear bonding curve together with allocative parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocativeCurve {
    pub base: LinearBondingCurve,
    pub params: AllocativeParams,
}

impl AllocativeCurve {
    pub fn new(base: LinearBondingCurve, params: AllocativeParams) -> Self {
        AllocativeCurve { base, params }
    }
}

impl PriceCurve for AllocativeCurve {
    fn price_at(&self, s: Dec) -> Dec {
        price_allocative(&self.base, &self.params, s).expect("price within range")
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Adapter for ad-hoc curves given as closures; sampled on the full grid.
pub struct FnCurve<F: Fn(Dec) -> Dec>(pub F);

impl<F: Fn(Dec) -> Dec> PriceCurve for FnCurve<F> {
    fn price_at(&self, s: Dec) -> Dec {
        (self.0)(s)
    }
}

/// Evenly spaced sample grid over `[0, s_max]` with `samples ≥ 2` points,
/// endpoints exact.
pub fn sample_grid(s_max: Dec, samples: u32) -> Result<Vec<Dec>, CurveError> {
    if samples < 2 {
        return Err(CurveError::InvalidParams("grid needs at least 2 samples"));
    }
    if !s_max.is_positive() {
        return Err(CurveError::InvalidParams("supply horizon must be positive"));
    }
    let last = Dec::from_int(i64::from(samples) - 1);
    let mut grid = Vec::with_capacity(samples as usize);
    for i in 0..samples {
        let idx = Dec::from_int(i64::from(i));
        grid.push(s_max.mul_div(idx, last, RoundDir::Nearest)?);
    }
    Ok(grid)
}

/// True when `curve(s) ≤ a + ε` across `[0, S]`, sampled on `grid` points.
/// Monotone curves are decided at `s = S` alone.
pub fn is_allocatively_efficient(
    curve: &impl PriceCurve,
    a: Dec,
    epsilon: Dec,
    s_max: Dec,
    grid: u32,
) -> Result<bool, CurveError> {
    if !epsilon.is_positive() {
        return Err(CurveError::InvalidParams("epsilon must be positive"));
    }
    let threshold = a.checked_add(epsilon)?;
    if curve.is_monotone() {
        return Ok(curve.price_at(s_max) <= threshold);
    }
    for s in sample_grid(s_max, grid)? {
        if curve.price_at(s) > threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True when the reference `e(s)` never exceeds `curve(s)` on the grid.
pub fn is_investment_efficient(
    curve: &impl PriceCurve,
    reference: impl Fn(Dec) -> Dec,
    s_max: Dec,
    grid: u32,
) -> Result<bool, CurveError> {
    for s in sample_grid(s_max, grid)? {
        if reference(s) > curve.price_at(s) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest tax rate guaranteeing ε-allocative efficiency for every
/// assessment and supply: `1/(1+ε)`, rounded up so the guarantee survives
/// grid rounding.
pub fn tau_plus(epsilon: Dec) -> Result<Dec, CurveError> {
    if !epsilon.is_positive() {
        return Err(CurveError::InvalidParams("epsilon must be positive"));
    }
    let eps = dec_to_ratio(epsilon);
    let tau = BigRational::one() / (BigRational::one() + eps);
    Ok(ratio_to_dec(&tau, RoundDir::Up)?)
}

/// Tax rate below which the allocative curve tracks the bonding curve:
/// `δ / max(1, |2−a|·p(S))`, rounded down and clamped into the open (0,1).
///
/// The uniform bound `sup |q−p| ≤ δ` that this threshold promises holds when
/// `p·|1+p−a| ≤ max(1, |2−a|·p(S))` for all `p ∈ [0, p(S)]` — satisfied in
/// particular whenever `p(S) ≤ 1` with `a ≤ 3`. Outside that regime the
/// denominator underestimates the curve gap and the threshold is only a
/// heuristic.
pub fn tau_minus(delta: Dec, a: Dec, p_at_s: Dec) -> Result<Dec, CurveError> {
    if !delta.is_positive() {
        return Err(CurveError::InvalidParams("delta must be positive"));
    }
    if !p_at_s.is_positive() {
        return Err(CurveError::InvalidParams("p(S) must be positive"));
    }
    let spread = (dec_to_ratio(a) - ratio_from_int(2)).abs() * dec_to_ratio(p_at_s);
    let denom = if spread > BigRational::one() {
        spread
    } else {
        BigRational::one()
    };
    let tau = dec_to_ratio(delta) / denom;
    let mut out = ratio_to_dec(&tau, RoundDir::Down)?;
    let top = Dec::ONE.checked_sub(Dec::ULP)?;
    if out >= Dec::ONE {
        out = top;
    }
    if !out.is_positive() {
        out = Dec::ULP;
    }
    Ok(out)
}
