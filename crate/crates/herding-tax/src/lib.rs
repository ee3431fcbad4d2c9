//! Herding on a binomial lattice under a transaction tax, and what the tax
//! does to the unfairness of the resulting market.
//!
//! The model is a discrete log price that reacts to its own recent past:
//! whenever the gap between today's price and a delayed average clears a
//! threshold `υ`, a drift term fires in the direction of the move (buy
//! pressure above, sell pressure below); inside the band the price is pure
//! compensated noise. A proportional transaction tax at rate `ρ`, paid on
//! round trips held for time `T`, widens the band: trades only pay when the
//! gap clears `υ = T·ρ`, so taxing harder silences the herd earlier.
//!
//! *Unfairness* quantifies how far the market is from offering every
//! participant a fair game — zero exactly when the compensated price is a
//! martingale. Three interchangeable views are implemented as
//! [`Method`]s: two equivalent log-scale forms (an indicator count of
//! drift activity and a conditional drift magnitude) and a price-level
//! form that keeps the discrete-time martingale defect of the noise
//! itself.
//!
//! The toolkit answers one question two ways:
//!
//! - [`exact_sweep`] enumerates all `2^n` sign sequences on small meshes
//!   and computes the unfairness at each threshold of a grid *exactly* —
//!   the log-scale result is nonincreasing in `υ` with its minimum at the
//!   largest threshold, and the sweep refuses to return anything else.
//! - [`coupled_sweep`] estimates the same curve on large meshes by Monte
//!   Carlo, driving every grid point with common random numbers so that
//!   (in the gentle-drift regime) the estimated curve is monotone exactly,
//!   not merely up to noise.
//!
//! Both report the argmin of the curve, which lands on the largest
//! threshold in range: within the model, the optimal transaction tax is
//! the heaviest one under consideration.
//!
//! Everything is deterministic by construction. Noise signs come from a
//! counter-based stream ([`SignSource`]) keyed by `(master seed, path
//! index, step)`, estimates are pure functions of their arguments, and
//! worker-thread counts provably cannot alter any result
//! ([`with_worker_pool`] only re-schedules slot-indexed work).
//!
//! The `examples/` directory walks through each capability; the
//! `herding-tax` binary exposes the same engines as `enumerate`, `mc` and
//! `verify` subcommands reading JSON configs ([`RunConfig`]) and writing
//! CSV tables or JSON reports.

pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod mc;
pub mod model;
pub mod unfairness;
pub mod verify;

pub use config::{GridSpec, ModelSection, ResolvedRun, RunConfig, RunSection, TaxSection};
pub use error::{Error, Result};
pub use exact::{
    enumerate_unfairness, enumerate_unfairness_guarded, exact_sweep, exact_sweep_with_method,
    ExactSweepTable, DEFAULT_ENUM_GUARD,
};
pub use lattice::{
    prefix_indicator_counts, prefix_violations, signs_from_seed, simulate_coupled, simulate_path,
    step, LatticePath, PrefixCounts, SignSource,
};
pub use mc::{argmin_tax, coupled_sweep, estimate_unfairness, with_worker_pool, SweepResult};
pub use model::{
    classify_gap, delay_gap, psi, threshold_from_tax, DelayKernel, DriftClass, KernelEntry,
    ModelParams, NoiseScaling, TaxSpec,
};
pub use unfairness::{
    estimate_discrepancy, log_conditional_unfairness, log_indicator_unfairness, path_unfairness,
    path_unfairness_per_step, price_level_unfairness, Method, UnfairnessEstimate,
};
pub use verify::{run_verification, SuiteOutcome, VerifyLevel, VerifyReport};
