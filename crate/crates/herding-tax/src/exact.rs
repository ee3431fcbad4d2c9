//! Exhaustive enumeration over the full sign space `{±1}^n`.
//!
//! For small meshes every outcome of the noise can be visited, so
//! expectations are computed exactly: each of the `2^n` equally likely sign
//! sequences is simulated, its steps are classified, and integer class
//! counts are aggregated. The unfairness value is then a dot product of
//! exact `u64` counts with per-class constants, divided by the path count —
//! a power of two, so the division is exact. Because the aggregation is
//! integer arithmetic, the result is bit-identical for any worker count or
//! scheduling order, not merely for a fixed reduction order.
//!
//! Enumeration cost doubles per mesh step; the [`DEFAULT_ENUM_GUARD`] caps
//! it at `2^24` paths. The `_guarded` variants accept a different ceiling
//! for callers who know what they are asking for.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::unfairness::{ClassCounts, Method, PathMeasure, UnfairnessEstimate, ALL_CLASSES};

/// Largest mesh the enumeration entry points accept by default (`2^24`
/// paths). Chosen so a full 50-point sweep stays in the minutes range on a
/// single desk machine.
pub const DEFAULT_ENUM_GUARD: usize = 24;

/// Paths per work block. Blocks are aggregated independently; integer
/// aggregation makes the combination order irrelevant to the result.
const BLOCK: u64 = 4096;

/// Hard ceiling on any guard: beyond `2^40` paths enumeration is not a
/// realistic computation on any machine this decade.
const GUARD_CEILING: usize = 40;

/// Integer aggregates of one enumeration: overall class totals and
/// per-step class totals across all paths.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Aggregate {
    totals: ClassCounts,
    /// `per_step[k][c]` counts the paths whose step `k` fell in class `c`
    /// (index order of [`ALL_CLASSES`]).
    per_step: Vec<[u64; 4]>,
}

impl Aggregate {
    fn zero(n: usize) -> Self {
        Aggregate {
            totals: ClassCounts::default(),
            per_step: vec![[0; 4]; n],
        }
    }

    fn merge(mut self, other: Aggregate) -> Aggregate {
        self.totals.accumulate(&other.totals);
        for (mine, theirs) in self.per_step.iter_mut().zip(&other.per_step) {
            for c in 0..4 {
                mine[c] += theirs[c];
            }
        }
        self
    }
}

fn check_guarded(n: usize, upsilon: f64, guard: usize) -> Result<()> {
    if guard > GUARD_CEILING {
        return Err(invalid(format!(
            "enumeration guard {guard} exceeds the hard ceiling {GUARD_CEILING}"
        )));
    }
    if n > guard {
        return Err(invalid(format!(
            "mesh of {n} steps needs 2^{n} paths, over the enumeration guard \
             of 2^{guard}; use Monte Carlo estimation for large meshes"
        )));
    }
    if !upsilon.is_finite() || upsilon < 0.0 {
        return Err(invalid(format!(
            "inaction threshold must be finite and nonnegative, got {upsilon}"
        )));
    }
    Ok(())
}

/// Classify every path of the `2^n` sign space under one threshold and
/// aggregate the class counts.
fn enumerate_aggregate(measure: &PathMeasure, n: usize, upsilon: f64) -> Aggregate {
    let paths: u64 = 1 << n;
    let blocks = paths.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut agg = Aggregate::zero(n);
            let mut values = Vec::with_capacity(n + 1);
            let mut classes = Vec::with_capacity(n);
            let end = ((b + 1) * BLOCK).min(paths);
            for index in b * BLOCK..end {
                // Natural binary order: bit k of the path index is the sign
                // of step k, set bit = up.
                measure.simulate_and_classify(
                    upsilon,
                    |k| if index >> k & 1 == 1 { 1 } else { -1 },
                    &mut values,
                    &mut classes,
                );
                for (k, &class) in classes.iter().enumerate() {
                    agg.totals.add(class);
                    agg.per_step[k][crate::unfairness::class_index(class)] += 1;
                }
            }
            agg
        })
        .reduce(|| Aggregate::zero(n), Aggregate::merge)
}

fn estimate_from_aggregate(
    measure: &PathMeasure,
    agg: &Aggregate,
    n: usize,
    upsilon: f64,
    method: Method,
) -> Result<UnfairnessEstimate> {
    let paths: u64 = 1 << n;
    let value = measure.value_from_aggregate(&agg.totals, paths, method)?;
    let mut per_step = Vec::with_capacity(n);
    for step in &agg.per_step {
        let mut term = 0.0;
        for class in ALL_CLASSES {
            let i = crate::unfairness::class_index(class);
            // Zero-count classes are skipped: a price-level term may be
            // infinite for a class no path ever visits, and that must
            // neither poison the sum nor raise an error.
            if step[i] > 0 {
                if method == Method::PriceLevel {
                    measure.price_term_checked(class)?;
                }
                term += step[i] as f64 * measure.per_step_term(class, method);
            }
        }
        per_step.push(term / paths as f64);
    }
    Ok(UnfairnessEstimate {
        value,
        stderr: None,
        method,
        per_step: Some(per_step),
        n,
        upsilon,
        path_count: paths,
        seed: None,
    })
}

/// Exact unfairness: the uniform average of per-path contributions over all
/// `2^n` sign sequences.
///
/// # Examples
///
/// ```
/// use herding_tax::{enumerate_unfairness, DelayKernel, Method, ModelParams};
/// let p = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap();
/// // On the 2-step mesh the first step never fires and the second always
/// // does at zero threshold, so the average drift magnitude is 1/2.
/// let e = enumerate_unfairness(&p, 2, 0.0, Method::LogIndicator).unwrap();
/// assert_eq!(e.value, 0.5);
/// assert_eq!(e.path_count, 4);
/// ```
pub fn enumerate_unfairness(
    params: &ModelParams,
    n: usize,
    upsilon: f64,
    method: Method,
) -> Result<UnfairnessEstimate> {
    enumerate_unfairness_guarded(params, n, upsilon, method, DEFAULT_ENUM_GUARD)
}

/// [`enumerate_unfairness`] with a caller-chosen guard on the mesh size.
pub fn enumerate_unfairness_guarded(
    params: &ModelParams,
    n: usize,
    upsilon: f64,
    method: Method,
    guard: usize,
) -> Result<UnfairnessEstimate> {
    check_guarded(n, upsilon, guard)?;
    let measure = PathMeasure::new(params, n)?;
    let agg = enumerate_aggregate(&measure, n, upsilon);
    estimate_from_aggregate(&measure, &agg, n, upsilon, method)
}

/// Exact unfairness across an ascending threshold grid.
///
/// The values of a log-method table are guaranteed nonincreasing along the
/// grid — exactly, not within a tolerance — with the minimum at the last
/// grid point. The table records where the minimum sits via
/// [`ExactSweepTable::argmin_index`] (ties resolved to the largest
/// threshold).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSweepTable {
    /// Mesh steps per unit time.
    pub n: usize,
    pub method: Method,
    /// Thresholds, ascending (repeats allowed).
    pub upsilon_grid: Vec<f64>,
    /// Exact unfairness per grid point.
    pub values: Vec<f64>,
    /// Paths averaged per grid point (`2^n`).
    pub path_count: u64,
    /// Snapshot of the model the table was computed for.
    pub params: ModelParams,
}

impl ExactSweepTable {
    /// Whether the value sequence never increases along the grid.
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Index of the minimal value, ties resolved to the largest threshold.
    pub fn argmin_index(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v <= self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Threshold attaining the minimum (largest such grid point).
    pub fn argmin_upsilon(&self) -> f64 {
        self.upsilon_grid[self.argmin_index()]
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("threshold grid must not be empty"));
    }
    for &u in grid {
        if !u.is_finite() || u < 0.0 {
            return Err(invalid(format!(
                "thresholds must be finite and nonnegative, got {u}"
            )));
        }
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("threshold grid must be ascending"));
    }
    Ok(())
}

/// Exact sweep of the defining log-indicator measure over a threshold grid.
///
/// # Examples
///
/// ```
/// use herding_tax::{exact_sweep, DelayKernel, ModelParams};
/// let p = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap();
/// let table = exact_sweep(&p, 2, &[0.0, 0.5, 2.0]).unwrap();
/// assert_eq!(table.values, vec![0.5, 0.25, 0.0]);
/// assert_eq!(table.argmin_upsilon(), 2.0);
/// ```
pub fn exact_sweep(
    params: &ModelParams,
    n: usize,
    upsilon_grid: &[f64],
) -> Result<ExactSweepTable> {
    exact_sweep_with_method(
        params,
        n,
        upsilon_grid,
        Method::LogIndicator,
        DEFAULT_ENUM_GUARD,
    )
}

/// [`exact_sweep`] for any method and guard.
///
/// For the log methods a non-monotone table is a property violation — the
/// finite-space monotonicity guarantee failed — and is returned as an error.
/// The price-level measure keeps a silent-step noise floor that fired steps
/// can dip under, so its tables are reported as computed; consult
/// [`ExactSweepTable::is_nonincreasing`].
pub fn exact_sweep_with_method(
    params: &ModelParams,
    n: usize,
    upsilon_grid: &[f64],
    method: Method,
    guard: usize,
) -> Result<ExactSweepTable> {
    check_grid(upsilon_grid)?;
    check_guarded(n, 0.0, guard)?;
    let measure = PathMeasure::new(params, n)?;
    let mut values = Vec::with_capacity(upsilon_grid.len());
    for &upsilon in upsilon_grid {
        let agg = enumerate_aggregate(&measure, n, upsilon);
        values.push(measure.value_from_aggregate(&agg.totals, 1 << n, method)?);
    }
    let table = ExactSweepTable {
        n,
        method,
        upsilon_grid: upsilon_grid.to_vec(),
        values,
        path_count: 1 << n,
        params: params.clone(),
    };
    if method.is_log() && !table.is_nonincreasing() {
        return Err(Error::PropertyViolation(format!(
            "exact {method} sweep is not nonincreasing: values {:?} on grid {:?}",
            table.values, table.upsilon_grid
        )));
    }
    Ok(table)
}
