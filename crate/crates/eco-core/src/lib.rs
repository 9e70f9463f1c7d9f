//! Equitable continuous organizations: bonding curves with self-assessment
//! voting, tax-damped allocative pricing, numerically safe mint/burn quoting,
//! and a deterministic scenario engine for adversarial trading studies.
//!
//! The crate is organized in layers:
//!
//! - [`numeric`]: 18-decimal fixed point with directed rounding, a
//!   guaranteed-accuracy ln kernel, and quadrature/bisection test oracles.
//! - [`curves`]: bonding and allocative curve evaluation, efficiency
//!   predicates, and the tax-rate thresholds.
//! - [`exchange`]: exact mint/burn quoting plus the cheap guaranteed bounds,
//!   rounded so a mint/burn round trip can never profit.
//! - [`organization`]: the ECO state machine with assessment voting, reserve
//!   accounting, solvency reporting, and a replayable receipt journal.
//! - [`agents`]: deterministic agent scenarios (investors, scalpers,
//!   sandwich attackers) with conservation-checked trace logs.
//! - [`analytics`]: transaction-log ingestion and the speculator/investor
//!   flow summary.
//! - [`cli`]: the `eco` command-line front end.

pub mod agents;
pub mod analytics;
pub mod cli;
pub mod curves;
pub mod exchange;
pub mod numeric;
pub mod organization;

pub use numeric::{Dec, NumericError, RoundDir};
