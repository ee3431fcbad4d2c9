//! Model primitives: drift specification, delay kernel, tax parameters.
//!
//! The market model evolves a log price on a uniform mesh of `n` steps per
//! unit time. Each step adds a herding drift that fires only when the gap
//! between the current log price and a weighted average of delayed log prices
//! reaches an inaction threshold `υ`, plus symmetric binomial noise and the
//! usual log-price compensator. The threshold is induced by a proportional
//! transaction tax: a tax rate `ρ` paid on a round trip over a holding time
//! `T` makes trades unprofitable until the gap reaches `υ = T·ρ`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Tolerance for requiring delay-kernel weights to sum to one.
pub const KERNEL_WEIGHT_TOLERANCE: f64 = 1e-12;

// ===== Noise scaling =====

/// Magnitude of one binomial noise increment relative to the mesh.
///
/// With `n` steps per unit time the noise contribution of one step is
/// `σ·h` with:
///
/// * [`NoiseScaling::Standard`]: `h = n^{-1/2}`, so the accumulated noise
///   variance over a unit interval is `σ²` and the compensated price level is
///   asymptotically driftless — the scaling to use for quantitative work.
/// * [`NoiseScaling::Paper`]: `h = (2n)^{-1/2}`, reproducing verbatim a
///   published form of the recursion whose noise variance is `σ²/2` per unit
///   time while the compensator stays `σ²/(2n)` per step. Kept selectable so
///   that form can be reproduced exactly.
///
/// Every structural result (coupling, monotonicity, endpoint argmin) holds
/// under both scalings; only the martingale limit of the compensated price
/// level distinguishes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseScaling {
    #[default]
    Standard,
    Paper,
}

impl NoiseScaling {
    /// Noise step size `h` for a mesh of `n` steps per unit time.
    pub fn step_size(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            NoiseScaling::Standard => 1.0 / nf.sqrt(),
            NoiseScaling::Paper => 1.0 / (2.0 * nf).sqrt(),
        }
    }
}

impl fmt::Display for NoiseScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseScaling::Standard => write!(f, "standard"),
            NoiseScaling::Paper => write!(f, "paper"),
        }
    }
}

impl FromStr for NoiseScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(NoiseScaling::Standard),
            "paper" => Ok(NoiseScaling::Paper),
            other => Err(invalid(format!(
                "unknown noise scaling {other:?} (expected \"standard\" or \"paper\")"
            ))),
        }
    }
}

// ===== Delay kernel =====

/// One lag of the delay kernel: compare the current log price against the
/// price `lag` time units ago, with relative weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub lag: f64,
    pub weight: f64,
}

/// Finitely supported distribution of look-back lags.
///
/// The herding gap at step `k` is `D_k = X_k − Σ_u w_u · X_{idx(k/n − u)}`,
/// where `idx` clamps at the start of the path. Lags are measured in time
/// units; a lag `u` corresponds to `floor(u·n)` mesh steps, exact whenever
/// `u·n` is an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<KernelEntry>", into = "Vec<KernelEntry>")]
pub struct DelayKernel {
    entries: Vec<KernelEntry>,
}

impl DelayKernel {
    /// Build a kernel from `(lag, weight)` pairs.
    ///
    /// Lags must be finite, strictly positive and pairwise distinct; weights
    /// must be finite, strictly positive and sum to one within
    /// [`KERNEL_WEIGHT_TOLERANCE`].
    pub fn new(entries: Vec<KernelEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("delay kernel needs at least one lag"));
        }
        for e in &entries {
            if !e.lag.is_finite() || e.lag <= 0.0 {
                return Err(invalid(format!(
                    "delay kernel lag must be finite and positive, got {}",
                    e.lag
                )));
            }
            if !e.weight.is_finite() || e.weight <= 0.0 {
                return Err(invalid(format!(
                    "delay kernel weight must be finite and positive, got {}",
                    e.weight
                )));
            }
        }
        let mut lags: Vec<f64> = entries.iter().map(|e| e.lag).collect();
        lags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if lags.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("delay kernel lags must be pairwise distinct"));
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > KERNEL_WEIGHT_TOLERANCE {
            return Err(invalid(format!(
                "delay kernel weights must sum to 1 (got {total})"
            )));
        }
        Ok(DelayKernel { entries })
    }

    /// Convenience constructor from bare pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lag, weight)| KernelEntry { lag, weight })
                .collect(),
        )
    }

    /// Kernel with a single unit-weight lag.
    pub fn single(lag: f64) -> Result<Self> {
        Self::from_pairs(&[(lag, 1.0)])
    }

    /// The `(lag, weight)` entries, in construction order.
    pub fn entries(&self) -> &[KernelEntry] {
        &self.entries
    }

    /// Lags converted to whole mesh steps for an `n`-step mesh:
    /// `(floor(lag·n), weight)` per entry.
    pub fn step_lags(&self, n: usize) -> Vec<(usize, f64)> {
        let nf = n as f64;
        self.entries
            .iter()
            .map(|e| ((e.lag * nf).floor() as usize, e.weight))
            .collect()
    }

    /// True when every lag lands exactly on the `n`-step mesh, i.e. `lag·n`
    /// is an integer for all entries. Strict set-ups may refuse meshes for
    /// which this is false rather than accept the floor rounding.
    pub fn is_mesh_aligned(&self, n: usize) -> bool {
        let nf = n as f64;
        self.entries.iter().all(|e| (e.lag * nf).fract() == 0.0)
    }
}

impl TryFrom<Vec<KernelEntry>> for DelayKernel {
    type Error = Error;

    fn try_from(entries: Vec<KernelEntry>) -> Result<Self> {
        DelayKernel::new(entries)
    }
}

impl From<DelayKernel> for Vec<KernelEntry> {
    fn from(k: DelayKernel) -> Self {
        k.entries
    }
}

// ===== Tax specification =====

/// Proportional transaction tax and the horizon over which it bites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxSpec {
    /// Round-trip tax rate `ρ ≥ 0`.
    pub rho: f64,
    /// Representative holding time `T > 0` of the taxed traders.
    pub holding_time: f64,
    /// Upper end `S ≥ 0` of the tax-rate interval under study; sweep grids
    /// must stay inside `[0, S]`.
    pub sweep_max: f64,
}

impl TaxSpec {
    pub fn new(rho: f64, holding_time: f64, sweep_max: f64) -> Result<Self> {
        let spec = TaxSpec {
            rho,
            holding_time,
            sweep_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(invalid(format!(
                "tax rate must be finite and nonnegative, got {}",
                self.rho
            )));
        }
        if !self.holding_time.is_finite() || self.holding_time <= 0.0 {
            return Err(invalid(format!(
                "holding time must be finite and positive, got {}",
                self.holding_time
            )));
        }
        if !self.sweep_max.is_finite() || self.sweep_max < 0.0 {
            return Err(invalid(format!(
                "sweep bound must be finite and nonnegative, got {}",
                self.sweep_max
            )));
        }
        Ok(())
    }

    /// Inaction threshold induced by this tax: `υ = T·ρ`.
    pub fn threshold(&self) -> f64 {
        self.holding_time * self.rho
    }
}

/// Inaction threshold `υ = T·ρ` induced by a round-trip tax rate `ρ` over a
/// holding time `T`.
///
/// # Examples
///
/// ```
/// let u = herding_tax::threshold_from_tax(0.02, 10.0).unwrap();
/// assert!((u - 0.2).abs() <= 1e-12);
/// assert_eq!(herding_tax::threshold_from_tax(0.0, 10.0).unwrap(), 0.0);
/// ```
pub fn threshold_from_tax(rho: f64, holding_time: f64) -> Result<f64> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(invalid(format!(
            "tax rate must be finite and nonnegative, got {rho}"
        )));
    }
    if !holding_time.is_finite() || holding_time <= 0.0 {
        return Err(invalid(format!(
            "holding time must be finite and positive, got {holding_time}"
        )));
    }
    Ok(holding_time * rho)
}

// ===== Drift rule =====

/// Which arm of the herding drift fires at a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftClass {
    /// Gap at or above the threshold and positive: buy pressure.
    Up,
    /// Gap at or below minus the threshold and negative: sell pressure.
    Down,
    /// Zero gap with zero threshold: the dedicated zero-gap drift level.
    Zero,
    /// Inside the inaction band: no drift.
    Silent,
}

/// Classify a herding gap against an inaction threshold `υ ≥ 0`.
///
/// The comparison is inclusive: a gap of exactly `±υ` fires. With `υ = 0` a
/// zero gap selects the dedicated zero-gap level rather than either side.
pub fn classify_gap(gap: f64, upsilon: f64) -> DriftClass {
    debug_assert!(upsilon >= 0.0, "threshold must be nonnegative");
    if gap >= upsilon && gap > 0.0 {
        DriftClass::Up
    } else if gap <= -upsilon && gap < 0.0 {
        DriftClass::Down
    } else if gap == 0.0 && upsilon == 0.0 {
        DriftClass::Zero
    } else {
        DriftClass::Silent
    }
}

// ===== Model parameters =====

/// Full parameter set of the delayed-herding log-price model.
///
/// Deserialization, like literal construction through the public fields,
/// does not enforce the invariants; engines call [`ModelParams::validate`]
/// once before running.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Drift level when buy pressure fires; must be positive.
    pub alpha_up: f64,
    /// Drift level when sell pressure fires; must be negative.
    pub alpha_down: f64,
    /// Drift level at an exactly zero gap when the threshold is zero.
    pub alpha_zero: f64,
    /// Noise scale `σ > 0`.
    pub sigma: f64,
    /// Delay kernel defining the herding gap.
    pub kernel: DelayKernel,
    /// Initial log price.
    pub x0: f64,
    /// Noise step-size convention.
    pub scaling: NoiseScaling,
}

impl ModelParams {
    /// Parameters with the common defaults `alpha_zero = 0`, `x0 = 0` and
    /// standard noise scaling.
    pub fn new(alpha_up: f64, alpha_down: f64, sigma: f64, kernel: DelayKernel) -> Result<Self> {
        let params = ModelParams {
            alpha_up,
            alpha_down,
            alpha_zero: 0.0,
            sigma,
            kernel,
            x0: 0.0,
            scaling: NoiseScaling::Standard,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_alpha_zero(mut self, alpha_zero: f64) -> Self {
        self.alpha_zero = alpha_zero;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_scaling(mut self, scaling: NoiseScaling) -> Self {
        self.scaling = scaling;
        self
    }

    /// Check all field invariants. Fields are public for ergonomic literal
    /// construction, so engines re-validate once before running.
    pub fn validate(&self) -> Result<()> {
        if !self.alpha_up.is_finite() || self.alpha_up <= 0.0 {
            return Err(invalid(format!(
                "upward drift level must be finite and positive, got {}",
                self.alpha_up
            )));
        }
        if !self.alpha_down.is_finite() || self.alpha_down >= 0.0 {
            return Err(invalid(format!(
                "downward drift level must be finite and negative, got {}",
                self.alpha_down
            )));
        }
        if !self.alpha_zero.is_finite() {
            return Err(invalid("zero-gap drift level must be finite"));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(invalid(format!(
                "noise scale must be finite and positive, got {}",
                self.sigma
            )));
        }
        if !self.x0.is_finite() {
            return Err(invalid("initial log price must be finite"));
        }
        // Kernel invariants are enforced at construction but fields are
        // public, so re-check.
        DelayKernel::new(self.kernel.entries().to_vec())?;
        Ok(())
    }

    /// Drift level for a classified gap.
    pub fn alpha(&self, class: DriftClass) -> f64 {
        match class {
            DriftClass::Up => self.alpha_up,
            DriftClass::Down => self.alpha_down,
            DriftClass::Zero => self.alpha_zero,
            DriftClass::Silent => 0.0,
        }
    }
}

/// Herding drift `ψ^{(υ)}(d)`: the drift level of the arm selected by
/// [`classify_gap`], i.e. `α(sign d)` when `|d| ≥ υ` and zero inside the
/// inaction band.
///
/// # Examples
///
/// ```
/// use herding_tax::{DelayKernel, ModelParams, psi};
/// let p = ModelParams::new(1.5, -0.8, 1.0, DelayKernel::single(0.5).unwrap()).unwrap();
/// assert_eq!(psi(0.3, 0.0, &p), 1.5);   // positive gap, zero threshold
/// assert_eq!(psi(0.05, 0.1, &p), 0.0);  // inside the inaction band
/// assert_eq!(psi(-0.1, 0.1, &p), -0.8); // boundary fires (inclusive)
/// ```
pub fn psi(gap: f64, upsilon: f64, params: &ModelParams) -> f64 {
    params.alpha(classify_gap(gap, upsilon))
}

/// Herding gap `D_k = X_k − Σ_u w_u · X_{max(k − floor(u·n), 0)}` of a value
/// sequence at step `k`, for an `n`-step mesh.
///
/// `values` must hold at least `k + 1` entries. Lags reaching before the
/// start of the path clamp to the initial value.
///
/// # Examples
///
/// ```
/// use herding_tax::{delay_gap, DelayKernel};
/// let kernel = DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)]).unwrap();
/// let values = [0.0, 0.3, 0.1, -0.2, 0.4];
/// let gap = delay_gap(&values, 3, &kernel, 4);
/// assert!((gap - (-0.4)).abs() <= 1e-12);
/// ```
pub fn delay_gap(values: &[f64], k: usize, kernel: &DelayKernel, n: usize) -> f64 {
    assert!(k < values.len(), "step {k} outside the recorded path");
    gap_with_step_lags(values, k, &kernel.step_lags(n))
}

/// Hot-path form of [`delay_gap`] with lags already converted to mesh steps.
pub(crate) fn gap_with_step_lags(values: &[f64], k: usize, step_lags: &[(usize, f64)]) -> f64 {
    let mut lagged = 0.0;
    for &(steps, weight) in step_lags {
        lagged += weight * values[k.saturating_sub(steps)];
    }
    values[k] - lagged
}
