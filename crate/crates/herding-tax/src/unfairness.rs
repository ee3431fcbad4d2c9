//! Unfairness of a traded price: how far it is from a martingale.
//!
//! The continuous-time measure integrates, over one unit of time, the
//! expected absolute drift rate of the compensated price given the market's
//! information. On the lattice it discretizes to one of three equivalent or
//! closely related forms, selected by [`Method`]:
//!
//! * [`Method::LogIndicator`] — `(1/n) Σ_k |ψ(D_k, υ)|`: the realized mean
//!   absolute herding drift of the log price.
//! * [`Method::LogConditional`] — `(1/n) Σ_k n·|E[X_{k+1} | F_k] − X_k +
//!   σ²/(2n)|`, with the one-step conditional expectation formed explicitly
//!   from the two equally likely children. Identical to the indicator form
//!   up to floating-point association, and tested to agree within `1e-12`.
//! * [`Method::PriceLevel`] — `Σ_k |E[Y_{k+1} | F_k]/Y_k − 1|` for the price
//!   level `Y = exp(X)`: the drift of the actual traded price. Not zero for
//!   a driftless log price at finite `n`; under standard noise scaling it
//!   vanishes like `σ⁴/(12 n)` as the mesh refines.
//!
//! All three are computed from the drift classification of each step alone:
//! one-step conditional quantities depend on the path only through which
//! drift arm fired, so per-step terms are class-pure constants. That makes
//! contributions bit-identical across initial-value shifts and across
//! coupled paths wherever their drift decisions agree — the properties the
//! sweep machinery's exact monotonicity rests on.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticePath, StepRule};
use crate::model::{classify_gap, DriftClass, ModelParams};

// ===== Method =====

/// Discretization of the unfairness measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LogIndicator,
    LogConditional,
    PriceLevel,
}

impl Method {
    /// Methods measuring the log price; these are exactly monotone under
    /// coupling, the price-level form only asymptotically.
    pub fn is_log(self) -> bool {
        matches!(self, Method::LogIndicator | Method::LogConditional)
    }

    /// Weight of one `per_step` entry in the total value: `1/n` for the log
    /// forms (time-integral weights), `1` for the price level (the mesh
    /// factor cancels against the one-step derivative).
    pub fn per_step_weight(self, n: usize) -> f64 {
        if self.is_log() {
            1.0 / n as f64
        } else {
            1.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LogIndicator => "log-indicator",
            Method::LogConditional => "log-conditional",
            Method::PriceLevel => "price-level",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-indicator" => Ok(Method::LogIndicator),
            "log-conditional" => Ok(Method::LogConditional),
            "price-level" => Ok(Method::PriceLevel),
            other => Err(invalid(format!(
                "unknown method {other:?} (expected \"log-indicator\", \
                 \"log-conditional\" or \"price-level\")"
            ))),
        }
    }
}

// ===== Estimates =====

/// An unfairness value together with the setup that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfairnessEstimate {
    /// The unfairness value (exact average or Monte Carlo mean).
    pub value: f64,
    /// Standard error of a Monte Carlo mean; absent for exact averages.
    pub stderr: Option<f64>,
    pub method: Method,
    /// Per-step breakdown of the expected absolute drift terms;
    /// `value = Σ per_step[k] · w` with `w` from [`Method::per_step_weight`].
    pub per_step: Option<Vec<f64>>,
    /// Mesh steps per unit time.
    pub n: usize,
    /// Inaction threshold the estimate refers to.
    pub upsilon: f64,
    /// Number of paths averaged (all `2^n` for exact enumeration).
    pub path_count: u64,
    /// Master seed of a Monte Carlo run; absent for exact enumeration.
    pub seed: Option<u64>,
}

impl UnfairnessEstimate {
    /// Check that the recorded per-step breakdown re-sums to the value
    /// within `tol`. Passes trivially when no breakdown is recorded.
    pub fn check_per_step(&self, tol: f64) -> Result<()> {
        let Some(per_step) = &self.per_step else {
            return Ok(());
        };
        if per_step.len() != self.n {
            return Err(Error::PropertyViolation(format!(
                "per-step breakdown has {} entries for a {}-step mesh",
                per_step.len(),
                self.n
            )));
        }
        let w = self.method.per_step_weight(self.n);
        let resummed: f64 = per_step.iter().map(|t| t * w).sum();
        if (resummed - self.value).abs() > tol {
            return Err(Error::PropertyViolation(format!(
                "per-step breakdown sums to {resummed}, value is {}",
                self.value
            )));
        }
        Ok(())
    }
}

/// Absolute difference between two estimates of the same quantity.
///
/// The estimates must agree on `(n, υ, path population)` — same mesh, same
/// threshold, same path count and same seed (or both exact); comparing
/// values computed from different path populations is a category error and
/// is rejected.
pub fn estimate_discrepancy(a: &UnfairnessEstimate, b: &UnfairnessEstimate) -> Result<f64> {
    if a.n != b.n {
        return Err(invalid(format!(
            "estimates use different meshes ({} vs {} steps)",
            a.n, b.n
        )));
    }
    if a.upsilon != b.upsilon {
        return Err(invalid(format!(
            "estimates use different thresholds ({} vs {})",
            a.upsilon, b.upsilon
        )));
    }
    if a.path_count != b.path_count || a.seed != b.seed {
        return Err(invalid(
            "estimates average different path populations".to_string(),
        ));
    }
    Ok((a.value - b.value).abs())
}

// ===== Per-path measurement =====

/// Class totals of one path: how many steps fired each drift arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct ClassCounts {
    pub(crate) up: u64,
    pub(crate) down: u64,
    pub(crate) zero: u64,
}

impl ClassCounts {
    pub(crate) fn add(&mut self, class: DriftClass) {
        match class {
            DriftClass::Up => self.up += 1,
            DriftClass::Down => self.down += 1,
            DriftClass::Zero => self.zero += 1,
            DriftClass::Silent => {}
        }
    }

    pub(crate) fn accumulate(&mut self, other: &ClassCounts) {
        self.up += other.up;
        self.down += other.down;
        self.zero += other.zero;
    }
}

/// Per-step unfairness terms of each drift class, for every method.
///
/// One-step conditional quantities of the recursion depend on the filtration
/// only through the drift classification, so each method reduces to a table
/// of four class constants:
///
/// * log-indicator: `|α(class)|`, the absolute drift level;
/// * log-conditional: `n·|E[X_{k+1}|F_k] − X_k + σ²/(2n)|` with the
///   conditional mean formed by enumerating both children;
/// * price level: `|E[exp(ΔX)|class] − 1|`.
///
/// The silent class contributes exactly zero to both log forms: its
/// deterministic increment part is exactly `−σ²/(2n)`, and averaging the two
/// children cancels the antithetic noise contributions exactly, so adding
/// the compensator back yields a hard floating-point zero.
///
/// A price-level class term can overflow to infinity when the per-step
/// increment is too large to exponentiate. The table keeps the infinity; an
/// evaluation error is raised if — and only if — a path actually visits such
/// a class, so parameter regimes whose overflowing arm never fires stay
/// usable.
#[derive(Debug, Clone)]
pub(crate) struct PathMeasure {
    rule: StepRule,
    x0: f64,
    n: usize,
    /// `|α(class)|`.
    abs_alpha: [f64; 4],
    /// `|E[X_{k+1}|F_k] − X_k + σ²/(2n)|` per class (one-step scale; the
    /// per-step breakdown reports it scaled by `n`).
    cond_term: [f64; 4],
    /// `|E[exp(ΔX)|class] − 1|` per class; may hold infinities.
    price_term: [f64; 4],
}

pub(crate) const ALL_CLASSES: [DriftClass; 4] = [
    DriftClass::Up,
    DriftClass::Down,
    DriftClass::Zero,
    DriftClass::Silent,
];

pub(crate) fn class_index(class: DriftClass) -> usize {
    match class {
        DriftClass::Up => 0,
        DriftClass::Down => 1,
        DriftClass::Zero => 2,
        DriftClass::Silent => 3,
    }
}

impl PathMeasure {
    pub(crate) fn new(params: &ModelParams, n: usize) -> Result<Self> {
        let rule = StepRule::new(params, n)?;
        Ok(Self::with_rule(params, n, rule))
    }

    pub(crate) fn with_rule(params: &ModelParams, n: usize, rule: StepRule) -> Self {
        let mut abs_alpha = [0.0; 4];
        let mut cond_term = [0.0; 4];
        let mut price_term = [0.0; 4];
        for class in ALL_CLASSES {
            let i = class_index(class);
            abs_alpha[i] = params.alpha(class).abs();

            // Enumerate the two equally likely children of a step in this
            // class and average their increments. The deterministic parts
            // are shared and the noise parts are antithetic, so summing the
            // components separately cancels the noise exactly — as it does
            // in expectation.
            let mut det_acc = 0.0;
            let mut noise_acc = 0.0;
            for sign in [1i8, -1] {
                det_acc += 0.5 * rule.det(class);
                noise_acc += 0.5 * f64::from(sign) * rule.noise;
            }
            let mean_delta = det_acc + noise_acc;
            cond_term[i] = (mean_delta + rule.comp).abs();

            let mean_growth =
                0.5 * (rule.increment(class, 1)).exp() + 0.5 * (rule.increment(class, -1)).exp();
            price_term[i] = (mean_growth - 1.0).abs();
        }
        PathMeasure {
            rule,
            x0: params.x0,
            n,
            abs_alpha,
            cond_term,
            price_term,
        }
    }

    /// Simulate a path, recording the drift classification of every step.
    pub(crate) fn simulate_and_classify<F: Fn(usize) -> i8>(
        &self,
        upsilon: f64,
        sign_of: F,
        values: &mut Vec<f64>,
        classes: &mut Vec<DriftClass>,
    ) {
        classes.clear();
        classes.reserve(self.n);
        values.clear();
        values.reserve(self.n + 1);
        values.push(self.x0);
        for k in 0..self.n {
            let class = classify_gap(self.rule.gap(values, k), upsilon);
            classes.push(class);
            let next = values[k] + self.rule.increment(class, sign_of(k));
            values.push(next);
        }
    }

    pub(crate) fn counts(classes: &[DriftClass]) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for &c in classes {
            counts.add(c);
        }
        counts
    }

    /// Path contribution from class totals.
    ///
    /// Grouped accumulation (counts times class constants, fixed term
    /// order) rather than a running per-step sum: with it, a path whose
    /// counts dominate another's pathwise also dominates it in the computed
    /// floating-point value, which is what lets coupled sweeps assert
    /// monotonicity at zero tolerance.
    pub(crate) fn value_from_counts(&self, counts: &ClassCounts, method: Method) -> Result<f64> {
        match method {
            Method::LogIndicator => Ok((counts.up as f64 * self.abs_alpha[0]
                + counts.down as f64 * self.abs_alpha[1]
                + counts.zero as f64 * self.abs_alpha[2])
                / self.n as f64),
            Method::LogConditional => Ok(counts.up as f64 * self.cond_term[0]
                + counts.down as f64 * self.cond_term[1]
                + counts.zero as f64 * self.cond_term[2]),
            Method::PriceLevel => {
                let silent = self.n as u64 - counts.up - counts.down - counts.zero;
                let used = [
                    (counts.up, DriftClass::Up),
                    (counts.down, DriftClass::Down),
                    (counts.zero, DriftClass::Zero),
                    (silent, DriftClass::Silent),
                ];
                // Zero-count classes are skipped entirely: they must not be
                // able to fail the finiteness check, and 0 × ∞ would poison
                // the sum with a NaN.
                let mut value = 0.0;
                for (count, class) in used {
                    if count > 0 {
                        value += count as f64 * self.price_term_checked(class)?;
                    }
                }
                Ok(value)
            }
        }
    }

    /// Average contribution from class totals aggregated across `paths`
    /// equally weighted paths of this mesh (exact enumeration sums all of
    /// `{±1}^n`, so `paths` is a power of two there and the final division
    /// is exact).
    pub(crate) fn value_from_aggregate(
        &self,
        totals: &ClassCounts,
        paths: u64,
        method: Method,
    ) -> Result<f64> {
        let pf = paths as f64;
        match method {
            Method::LogIndicator => Ok((totals.up as f64 * self.abs_alpha[0]
                + totals.down as f64 * self.abs_alpha[1]
                + totals.zero as f64 * self.abs_alpha[2])
                / self.n as f64
                / pf),
            Method::LogConditional => Ok((totals.up as f64 * self.cond_term[0]
                + totals.down as f64 * self.cond_term[1]
                + totals.zero as f64 * self.cond_term[2])
                / pf),
            Method::PriceLevel => {
                let silent = self.n as u64 * paths - totals.up - totals.down - totals.zero;
                let used = [
                    (totals.up, DriftClass::Up),
                    (totals.down, DriftClass::Down),
                    (totals.zero, DriftClass::Zero),
                    (silent, DriftClass::Silent),
                ];
                let mut value = 0.0;
                for (count, class) in used {
                    if count > 0 {
                        value += count as f64 * self.price_term_checked(class)?;
                    }
                }
                Ok(value / pf)
            }
        }
    }

    /// The per-step breakdown term of one classified step.
    pub(crate) fn per_step_term(&self, class: DriftClass, method: Method) -> f64 {
        let i = class_index(class);
        match method {
            Method::LogIndicator => self.abs_alpha[i],
            Method::LogConditional => self.n as f64 * self.cond_term[i],
            Method::PriceLevel => self.price_term[i],
        }
    }

    /// The price-level term of a class, as an error when it overflowed.
    pub(crate) fn price_term_checked(&self, class: DriftClass) -> Result<f64> {
        let term = self.price_term[class_index(class)];
        if term.is_finite() {
            Ok(term)
        } else {
            Err(Error::Evaluation(format!(
                "price-level growth factor overflowed on a {class:?} step; \
                 the per-step increment is too large to exponentiate"
            )))
        }
    }

    pub(crate) fn rule(&self) -> &StepRule {
        &self.rule
    }
}

// ===== Path-level public API =====

fn classify_path(
    path: &LatticePath,
    params: &ModelParams,
) -> Result<(PathMeasure, Vec<DriftClass>)> {
    let measure = PathMeasure::new(params, path.n)?;
    if path.values.len() != path.n + 1 {
        return Err(invalid(format!(
            "path records {} values for a {}-step mesh",
            path.values.len(),
            path.n
        )));
    }
    let step_lags = &measure.rule().step_lags;
    let classes = (0..path.n)
        .map(|k| {
            classify_gap(
                crate::model::gap_with_step_lags(&path.values, k, step_lags),
                path.upsilon,
            )
        })
        .collect();
    Ok((measure, classes))
}

/// Contribution of one path to the unfairness of the chosen method.
pub fn path_unfairness(path: &LatticePath, params: &ModelParams, method: Method) -> Result<f64> {
    let (measure, classes) = classify_path(path, params)?;
    measure.value_from_counts(&PathMeasure::counts(&classes), method)
}

/// Per-step breakdown of one path's contribution; entry `k` is the absolute
/// expected-drift term of step `k` (see [`UnfairnessEstimate::per_step`]).
pub fn path_unfairness_per_step(
    path: &LatticePath,
    params: &ModelParams,
    method: Method,
) -> Result<Vec<f64>> {
    let (measure, classes) = classify_path(path, params)?;
    if method == Method::PriceLevel {
        for &class in &classes {
            measure.price_term_checked(class)?;
        }
    }
    Ok(classes
        .iter()
        .map(|&c| measure.per_step_term(c, method))
        .collect())
}

/// Realized mean absolute herding drift of the log price along one path:
/// `(1/n) Σ_k |ψ(D_k, υ)|`.
pub fn log_indicator_unfairness(path: &LatticePath, params: &ModelParams) -> Result<f64> {
    path_unfairness(path, params, Method::LogIndicator)
}

/// Log-price unfairness of one path with the one-step conditional
/// expectation enumerated explicitly from both children:
/// `(1/n) Σ_k n·|E[X_{k+1} | F_k] − X_k + σ²/(2n)|`.
pub fn log_conditional_unfairness(path: &LatticePath, params: &ModelParams) -> Result<f64> {
    path_unfairness(path, params, Method::LogConditional)
}

/// Price-level unfairness of one path: `Σ_k |E[Y_{k+1} | F_k]/Y_k − 1|` for
/// `Y = exp(X)`. Overflow of the growth factor is reported as an evaluation
/// error, never clipped.
pub fn price_level_unfairness(path: &LatticePath, params: &ModelParams) -> Result<f64> {
    path_unfairness(path, params, Method::PriceLevel)
}
