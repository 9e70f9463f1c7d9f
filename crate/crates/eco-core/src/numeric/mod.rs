//! Deterministic fixed-point arithmetic, the natural-log kernel, and the
//! quadrature/bisection oracles used to cross-check closed forms.

mod dec;
mod ln;
pub(crate) mod ratio;
mod quad;

pub use dec::{Dec, NumericError, RoundDir, DECIMALS};
pub use ln::ln1p;
pub(crate) use ln::ln1p_fixed;
pub use quad::{bracket_solve, integrate};
