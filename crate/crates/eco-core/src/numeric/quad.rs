//! Test oracles: adaptive-Simpson quadrature and bisection root bracketing.
//!
//! These exist to check the closed-form quoting paths from an independent
//! direction. Production quoting never calls them.

use super::dec::{Dec, NumericError, RoundDir};

const MAX_DEPTH: u32 = 48;

/// Area under `f` over `[lo, hi]` to within `tol`, by adaptive Simpson
/// subdivision with Richardson extrapolation.
pub fn integrate<F>(f: F, lo: Dec, hi: Dec, tol: Dec) -> Result<Dec, NumericError>
where
    F: Fn(f64) -> f64,
{
    if !tol.is_positive() {
        return Err(NumericError::Domain("integration tolerance must be positive"));
    }
    if lo > hi {
        return Err(NumericError::Domain("integration bounds out of order"));
    }
    if lo == hi {
        return Ok(Dec::ZERO);
    }
    let a = lo.to_f64();
    let b = hi.to_f64();
    let eps = tol.to_f64();
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    let mut converged = true;
    let total = simpson_step(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH, &mut converged);
    if !converged {
        return Err(NumericError::ToleranceNotMet(MAX_DEPTH));
    }
    Dec::from_f64(total, RoundDir::Nearest)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    converged: &mut bool,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *converged = false;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, converged)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, converged)
}

/// Bisection on a monotone `g` whose signs straddle zero over `[lo, hi]`.
/// Terminates with a bracket no wider than `tol` (or one grid ulp) and
/// returns its midpoint.
pub fn bracket_solve<G>(g: G, lo: Dec, hi: Dec, tol: Dec) -> Result<Dec, NumericError>
where
    G: Fn(Dec) -> Dec,
{
    if !tol.is_positive() {
        return Err(NumericError::Domain("bracket tolerance must be positive"));
    }
    if lo > hi {
        return Err(NumericError::Domain("bracket bounds out of order"));
    }
    let mut lo = lo;
    let mut hi = hi;
    let f_lo = g(lo);
    if f_lo.is_zero() {
        return Ok(lo);
    }
    let f_hi = g(hi);
    if f_hi.is_zero() {
        return Ok(hi);
    }
    if f_lo.is_negative() == f_hi.is_negative() {
        return Err(NumericError::NoBracket);
    }
    let low_is_negative = f_lo.is_negative();
    loop {
        let width = hi.checked_sub(lo)?;
        let half = width.div(Dec::from_int(2), RoundDir::Down)?;
        let mid = lo.checked_add(half)?;
        if width <= tol || mid == lo {
            return Ok(mid);
        }
        let f_mid = g(mid);
        if f_mid.is_zero() {
            return Ok(mid);
        }
        if f_mid.is_negative() == low_is_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Dec {
        s.parse().unwrap()
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|z| z, Dec::ZERO, Dec::ONE, dec("0.000000000001")).unwrap();
        assert!((v.to_f64() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integrates_allocative_integrand() {
        // ∫₀¹ 1.5ζ/(1+0.5ζ) dζ = 6(0.5 − ln 1.5)
        // 50-digit reference: 0.56720935135101370813192130721390518056805745922503
        let v = integrate(
            |z| 1.5 * z / (1.0 + 0.5 * z),
            Dec::ZERO,
            Dec::ONE,
            dec("0.000000000001"),
        )
        .unwrap();
        assert!((v.to_f64() - 0.567209351351013708).abs() < 1e-12, "{v}");
    }

    #[test]
    fn empty_interval_is_zero() {
        let c = dec("3.7");
        assert_eq!(integrate(|z| z * z, c, c, Dec::ULP).unwrap(), Dec::ZERO);
    }

    #[test]
    fn additive_over_adjacent_intervals() {
        let f = |z: f64| (1.0 + z).ln() * z;
        let tol = dec("0.000000000001");
        let ab = integrate(f, Dec::ZERO, dec("1.3"), tol).unwrap();
        let bc = integrate(f, dec("1.3"), dec("4"), tol).unwrap();
        let ac = integrate(f, Dec::ZERO, dec("4"), tol).unwrap();
        let sum = ab.checked_add(bc).unwrap();
        let gap = sum.checked_sub(ac).unwrap().abs();
        assert!(gap <= dec("0.000000000003"), "additivity gap {gap}");
    }

    #[test]
    fn bracket_finds_linear_root() {
        let root = bracket_solve(
            |z| z.checked_sub(Dec::ONE).unwrap(),
            Dec::ZERO,
            Dec::from_int(2),
            dec("0.000000000001"),
        )
        .unwrap();
        assert!(root.checked_sub(Dec::ONE).unwrap().abs() <= dec("0.000000000001"));
    }

    #[test]
    fn bracket_finds_sqrt_two() {
        // z² − 2 over [0, 2]; 50-digit reference
        // 1.4142135623730950488016887242096980785696718753769
        let root = bracket_solve(
            |z| z.mul(z, RoundDir::Nearest).unwrap().checked_sub(Dec::from_int(2)).unwrap(),
            Dec::ZERO,
            Dec::from_int(2),
            dec("0.000000000001"),
        )
        .unwrap();
        let err = root.checked_sub(dec("1.414213562373095049")).unwrap().abs();
        assert!(err <= dec("0.000000000001"), "{root}");
    }

    #[test]
    fn bracket_rejects_same_sign() {
        let r = bracket_solve(
            |z| z.checked_add(Dec::from_int(5)).unwrap(),
            Dec::ZERO,
            Dec::ONE,
            Dec::ULP,
        );
        assert_eq!(r, Err(NumericError::NoBracket));
    }

    #[test]
    fn bracket_result_is_final_bracket_midpoint() {
        // Root at an off-grid point; the returned midpoint must sit within
        // tol of the true root.
        let root = bracket_solve(
            |z| {
                z.mul(z, RoundDir::Nearest)
                    .unwrap()
                    .mul(z, RoundDir::Nearest)
                    .unwrap()
                    .checked_sub(dec("2.5"))
                    .unwrap()
            },
            Dec::ZERO,
            Dec::from_int(2),
            dec("0.0000000001"),
        )
        .unwrap();
        let cube = root
            .mul(root, RoundDir::Nearest)
            .unwrap()
            .mul(root, RoundDir::Nearest)
            .unwrap();
        assert!(cube.checked_sub(dec("2.5")).unwrap().abs() < dec("0.000000002"));
    }
}
