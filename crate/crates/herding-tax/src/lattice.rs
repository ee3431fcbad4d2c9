//! Binomial lattice simulation of the delayed-herding log price.
//!
//! One mesh step of the recursion adds
//!
//! ```text
//! X_{k+1} = X_k + ψ(D_k, υ)/n + σ·s_k·h − σ²/(2n)
//! ```
//!
//! where `D_k` is the herding gap of the path so far, `s_k = ±1` is the
//! noise sign of the step and `h` is the noise step size of the active
//! [`NoiseScaling`](crate::model::NoiseScaling). Sign sequences come from a
//! counter-based generator, so any path can be produced independently of any
//! other — parallel schedules cannot change results — and coupled paths
//! (same signs, different thresholds) are the natural unit of work.

use std::cmp::Ordering;

use crate::error::{invalid, Result};
use crate::model::{classify_gap, gap_with_step_lags, DriftClass, ModelParams};

// ===== Counter-based sign streams =====

/// Golden-ratio increment of the SplitMix64 generator.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford's Mix13 variant): a published 64-bit mixing
/// function with full avalanche, applied here to structured counters.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic, platform-independent source of `±1` noise signs.
///
/// The sign of step `k` on path `i` under master seed `s` is the top bit of
/// `mix64(key(s, i) + (k+1)·γ)` with `key(s, i) = mix64(s + (i+1)·γ)` and
/// `γ` the SplitMix64 golden-ratio increment — a pure function of
/// `(s, i, k)`, so streams can be evaluated in any order, on any worker
/// count, one bit per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignSource {
    pub master_seed: u64,
    pub path_index: u64,
}

impl SignSource {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        SignSource {
            master_seed,
            path_index,
        }
    }

    /// Mixed per-path stream key.
    pub fn stream_key(&self) -> u64 {
        mix64(
            self.master_seed
                .wrapping_add(self.path_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Noise sign of one step.
    pub fn sign(&self, step: usize) -> i8 {
        sign_from_key(self.stream_key(), step)
    }

    /// The first `n` noise signs of this path.
    pub fn signs(&self, n: usize) -> Vec<i8> {
        let mut out = Vec::new();
        self.signs_into(n, &mut out);
        out
    }

    /// Fill `out` with the first `n` noise signs, reusing its allocation.
    pub fn signs_into(&self, n: usize, out: &mut Vec<i8>) {
        let key = self.stream_key();
        out.clear();
        out.extend((0..n).map(|k| sign_from_key(key, k)));
    }
}

fn sign_from_key(stream_key: u64, step: usize) -> i8 {
    let word =
        mix64(stream_key.wrapping_add((step as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
    if word >> 63 == 1 {
        1
    } else {
        -1
    }
}

/// The `n` noise signs of path `path_index` under `master_seed`.
///
/// # Examples
///
/// ```
/// let a = herding_tax::signs_from_seed(7, 0, 64);
/// let b = herding_tax::signs_from_seed(7, 0, 64);
/// let c = herding_tax::signs_from_seed(7, 1, 64);
/// assert_eq!(a, b);
/// assert_ne!(a, c);
/// ```
pub fn signs_from_seed(master_seed: u64, path_index: u64, n: usize) -> Vec<i8> {
    SignSource::new(master_seed, path_index).signs(n)
}

// ===== Step rule =====

/// Precomputed per-mesh constants of the recursion.
///
/// The increment of a step is `det(class) + sign·noise` with
/// `det(class) = α(class)/n − σ²/(2n)`; grouping drift and compensator into
/// one deterministic part per drift class makes increments a pure function
/// of the classification, which keeps coupled paths bit-identical while
/// their drift decisions agree.
#[derive(Debug, Clone)]
pub(crate) struct StepRule {
    pub(crate) step_lags: Vec<(usize, f64)>,
    /// Deterministic increment part, indexed by drift class.
    det: [f64; 4],
    /// Noise magnitude `σ·h` of one step.
    pub(crate) noise: f64,
    /// Compensator `σ²/(2n)` of one step.
    pub(crate) comp: f64,
}

impl StepRule {
    pub(crate) fn new(params: &ModelParams, n: usize) -> Result<Self> {
        params.validate()?;
        Self::new_unchecked(params, n)
    }

    /// Same as [`StepRule::new`] but trusting the caller on parameter
    /// invariants, which lets unit tests probe degenerate settings (σ = 0).
    pub(crate) fn new_unchecked(params: &ModelParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("mesh needs at least one step per unit time"));
        }
        let nf = n as f64;
        let comp = params.sigma * params.sigma / (2.0 * nf);
        let det = [
            params.alpha_up / nf - comp,
            params.alpha_down / nf - comp,
            params.alpha_zero / nf - comp,
            0.0 / nf - comp,
        ];
        Ok(StepRule {
            step_lags: params.kernel.step_lags(n),
            det,
            noise: params.sigma * params.scaling.step_size(n),
            comp,
        })
    }

    fn class_index(class: DriftClass) -> usize {
        match class {
            DriftClass::Up => 0,
            DriftClass::Down => 1,
            DriftClass::Zero => 2,
            DriftClass::Silent => 3,
        }
    }

    /// Deterministic (drift + compensator) part of a step's increment.
    pub(crate) fn det(&self, class: DriftClass) -> f64 {
        self.det[Self::class_index(class)]
    }

    /// Full increment of a step.
    pub(crate) fn increment(&self, class: DriftClass, sign: i8) -> f64 {
        self.det(class) + f64::from(sign) * self.noise
    }

    /// Herding gap of a value prefix at step `k`.
    pub(crate) fn gap(&self, values: &[f64], k: usize) -> f64 {
        gap_with_step_lags(values, k, &self.step_lags)
    }
}

fn check_upsilon(upsilon: f64) -> Result<()> {
    if !upsilon.is_finite() || upsilon < 0.0 {
        return Err(invalid(format!(
            "inaction threshold must be finite and nonnegative, got {upsilon}"
        )));
    }
    Ok(())
}

fn check_sign(sign: i8) -> Result<()> {
    if sign != 1 && sign != -1 {
        return Err(invalid(format!("noise sign must be +1 or -1, got {sign}")));
    }
    Ok(())
}

// ===== Single steps and whole paths =====

/// Apply one step of the recursion to a path prefix.
///
/// `hist` holds the values `X_0..X_k` produced so far (at least the initial
/// value); the result is `X_{k+1}` for the given noise sign.
///
/// # Examples
///
/// ```
/// use herding_tax::{step, DelayKernel, ModelParams};
/// let p = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap();
/// // Dead drift (threshold far away): 0 + 1·4^{-1/2} − 1/8 = 0.375.
/// let x1 = step(&[0.0], 1, 10.0, &p, 4).unwrap();
/// assert!((x1 - 0.375).abs() <= 1e-12);
/// ```
pub fn step(hist: &[f64], sign: i8, upsilon: f64, params: &ModelParams, n: usize) -> Result<f64> {
    if hist.is_empty() {
        return Err(invalid(
            "path history must contain at least the initial value",
        ));
    }
    check_upsilon(upsilon)?;
    check_sign(sign)?;
    let rule = StepRule::new(params, n)?;
    let k = hist.len() - 1;
    let class = classify_gap(rule.gap(hist, k), upsilon);
    Ok(hist[k] + rule.increment(class, sign))
}

/// One realized path of the recursion: the noise signs that drove it and the
/// `n + 1` values it visited.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    /// Mesh steps per unit time.
    pub n: usize,
    /// Inaction threshold the path was simulated under.
    pub upsilon: f64,
    /// Noise signs, one per step.
    pub signs: Vec<i8>,
    /// Values `X_0..X_n`.
    pub values: Vec<f64>,
}

impl LatticePath {
    /// Herding gap at step `k` (defined for `0 ≤ k ≤ n`).
    pub fn delay_gap(&self, k: usize, params: &ModelParams) -> f64 {
        crate::model::delay_gap(&self.values, k, &params.kernel, self.n)
    }

    /// Recompute every increment from the recorded signs and check the
    /// recorded values match bit for bit.
    pub fn verify(&self, params: &ModelParams) -> Result<()> {
        let recomputed = simulate_path(params, self.n, &self.signs, self.upsilon)?;
        if recomputed.values != self.values {
            return Err(crate::error::Error::PropertyViolation(
                "recorded path values do not reproduce the recursion".into(),
            ));
        }
        Ok(())
    }
}

/// Core simulation loop shared by every entry point. Appends `X_0..X_n` into
/// `values` (cleared first), reading the noise sign of step `k` from
/// `sign_of(k)`.
pub(crate) fn simulate_values_into<F: Fn(usize) -> i8>(
    rule: &StepRule,
    x0: f64,
    n: usize,
    upsilon: f64,
    sign_of: F,
    values: &mut Vec<f64>,
) {
    values.clear();
    values.reserve(n + 1);
    values.push(x0);
    for k in 0..n {
        let class = classify_gap(rule.gap(values, k), upsilon);
        let next = values[k] + rule.increment(class, sign_of(k));
        values.push(next);
    }
}

/// Simulate one path of `n` steps under threshold `upsilon` from explicit
/// noise signs.
///
/// # Examples
///
/// ```
/// use herding_tax::{simulate_path, DelayKernel, ModelParams};
/// let p = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap();
/// let path = simulate_path(&p, 2, &[1, 1], 0.0).unwrap();
/// // First step: zero gap at zero threshold, zero drift level; only noise
/// // and compensator move the price: X_1 = 2^{-1/2} − 1/4.
/// let expected = 1.0 / 2f64.sqrt() - 0.25;
/// assert!((path.values[1] - expected).abs() <= 1e-12);
/// ```
pub fn simulate_path(
    params: &ModelParams,
    n: usize,
    signs: &[i8],
    upsilon: f64,
) -> Result<LatticePath> {
    let rule = StepRule::new(params, n)?;
    check_upsilon(upsilon)?;
    if signs.len() != n {
        return Err(invalid(format!(
            "need exactly {n} noise signs, got {}",
            signs.len()
        )));
    }
    for &s in signs {
        check_sign(s)?;
    }
    let mut values = Vec::new();
    simulate_values_into(&rule, params.x0, n, upsilon, |k| signs[k], &mut values);
    Ok(LatticePath {
        n,
        upsilon,
        signs: signs.to_vec(),
        values,
    })
}

/// Simulate one path per threshold, all driven by the same noise signs
/// (common random numbers).
///
/// The thresholds must be sorted ascending — coupled outputs are meaningful
/// as a family and downstream consumers rely on the order.
pub fn simulate_coupled(
    params: &ModelParams,
    n: usize,
    signs: &[i8],
    upsilons: &[f64],
) -> Result<Vec<LatticePath>> {
    if upsilons.is_empty() {
        return Err(invalid("coupled simulation needs at least one threshold"));
    }
    // `partial_cmp` keeps the NaN case (incomparable) on the error path.
    let ordered = |w: &[f64]| {
        matches!(
            w[0].partial_cmp(&w[1]),
            Some(Ordering::Less | Ordering::Equal)
        )
    };
    if upsilons.windows(2).any(|w| !ordered(w)) {
        return Err(invalid(
            "coupled thresholds must be sorted ascending".to_string(),
        ));
    }
    upsilons
        .iter()
        .map(|&u| simulate_path(params, n, signs, u))
        .collect()
}

// ===== Indicator prefix counts =====

/// Cumulative counts of the raw herding indicators along one path.
///
/// Entry `ℓ` of `up` is `#{k ≤ ℓ : D_k ≥ υ}` and of `down` is
/// `#{k ≤ ℓ : D_k ≤ −υ}`, for `ℓ = 0..n`. Under coupling these counts are
/// pointwise monotone in the threshold: raising `υ` can only thin out both
/// families, at every prefix — the combinatorial heart of why the unfairness
/// of log prices cannot increase with the tax.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCounts {
    pub upsilon: f64,
    pub up: Vec<u32>,
    pub down: Vec<u32>,
}

/// Cumulative indicator counts of a simulated path.
pub fn prefix_indicator_counts(path: &LatticePath, params: &ModelParams) -> PrefixCounts {
    let step_lags = params.kernel.step_lags(path.n);
    let mut up = Vec::with_capacity(path.n + 1);
    let mut down = Vec::with_capacity(path.n + 1);
    let (mut cu, mut cd) = (0u32, 0u32);
    for k in 0..=path.n {
        let gap = gap_with_step_lags(&path.values, k, &step_lags);
        if gap >= path.upsilon {
            cu += 1;
        }
        if gap <= -path.upsilon {
            cd += 1;
        }
        up.push(cu);
        down.push(cd);
    }
    PrefixCounts {
        upsilon: path.upsilon,
        up,
        down,
    }
}

/// Number of prefix positions at which the coupling inequalities fail
/// between a lower-threshold and a higher-threshold path.
///
/// For coupled paths with `lower.upsilon ≤ higher.upsilon` both count
/// families of `higher` must stay pointwise at or below those of `lower`;
/// each `(family, prefix)` position violating that adds one.
pub fn prefix_violations(lower: &PrefixCounts, higher: &PrefixCounts) -> u64 {
    assert!(
        lower.upsilon <= higher.upsilon,
        "arguments must be ordered by threshold"
    );
    assert_eq!(lower.up.len(), higher.up.len(), "prefix lengths differ");
    let mut violations = 0;
    for l in 0..lower.up.len() {
        if higher.up[l] > lower.up[l] {
            violations += 1;
        }
        if higher.down[l] > lower.down[l] {
            violations += 1;
        }
    }
    violations
}
