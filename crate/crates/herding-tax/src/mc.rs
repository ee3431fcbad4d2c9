//! Monte Carlo estimation with common-random-numbers coupling.
//!
//! Large meshes put exhaustive enumeration out of reach, so unfairness is
//! estimated by sampling sign sequences. The estimator leans on one design
//! decision: every sampled sign sequence is reused for *every* threshold of
//! a sweep. Under that coupling the per-path contribution vector of a log
//! method is nonincreasing in the threshold path by path, so the averaged
//! curve inherits monotonicity exactly — a finite-sample certainty rather
//! than a statistical tendency (summing pointwise-dominated sequences in
//! the same order keeps the domination under floating-point rounding).
//!
//! Determinism does not depend on scheduling: each path's contribution is a
//! pure function of `(master_seed, path_index, params)` written into its own
//! slot, and the final reduction is a sequential pass in path order. Worker
//! counts provably cannot alter any output byte; [`with_worker_pool`] is the
//! knob.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::exact::check_grid;
use crate::lattice::SignSource;
use crate::model::ModelParams;
use crate::unfairness::{Method, PathMeasure, UnfairnessEstimate};
use serde::Serialize;

/// Paths per parallel work block.
const CHUNK: usize = 64;

/// Cap on `path_count × grid length` so a sweep cannot silently request
/// unbounded memory for its contribution table (8 bytes per slot).
const MAX_SLOTS: u64 = 1 << 30;

/// Run `f` on a dedicated pool of `workers` threads (`0` = the ambient
/// pool). The estimator's outputs are bit-identical for every choice.
pub fn with_worker_pool<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Evaluation(format!("could not build a {workers}-thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// A threshold sweep estimated from one coupled path population.
///
/// When `coupled` is set, all grid points share the same sign sequences and
/// the log-method estimate values are exactly nonincreasing along the grid
/// (enforced at construction; a violation is a [`Error::PropertyViolation`]).
/// Price-level sweeps are reported as computed: their silent-step noise
/// floor is not covered by the log-level monotonicity argument, so rises are
/// only `flagged` when they exceed twice the combined standard error of the
/// adjacent pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Mesh steps per unit time.
    pub n: usize,
    pub method: Method,
    /// Paths sampled per grid point.
    pub path_count: u64,
    pub master_seed: u64,
    /// Whether all grid points were driven by common random numbers.
    pub coupled: bool,
    /// Thresholds, ascending.
    pub upsilon_grid: Vec<f64>,
    /// Tax rates `ρ = υ/T`, present when the sweep was tied to a holding
    /// time via [`SweepResult::derive_rho_grid`].
    pub rho_grid: Option<Vec<f64>>,
    /// One estimate per grid point, same order as `upsilon_grid`.
    pub estimates: Vec<UnfairnessEstimate>,
    /// Whether the estimate values never increase along the grid.
    pub monotone: bool,
    /// Adjacent grid pairs `(i, i+1)` where a price-level sweep rose by more
    /// than `2·(stderr_i + stderr_{i+1})`. Always empty for log methods.
    pub flagged_pairs: Vec<(usize, usize)>,
    /// Index of the minimal estimate, ties resolved to the largest threshold.
    pub argmin_index: usize,
}

impl SweepResult {
    /// Threshold attaining the minimal estimate (largest such grid point).
    pub fn argmin_upsilon(&self) -> f64 {
        self.upsilon_grid[self.argmin_index]
    }

    /// Attach the tax-rate grid implied by a holding time: `ρ = υ/T`.
    pub fn derive_rho_grid(&mut self, holding_time: f64) -> Result<()> {
        if !holding_time.is_finite() || holding_time <= 0.0 {
            return Err(invalid(format!(
                "holding time must be positive and finite, got {holding_time}"
            )));
        }
        self.rho_grid = Some(self.upsilon_grid.iter().map(|u| u / holding_time).collect());
        Ok(())
    }
}

/// The optimal tax of a sweep: the largest grid point attaining the minimal
/// unfairness, as `(ρ*, υ*)`.
///
/// For coupled log-method sweeps this is provably the right endpoint of the
/// grid. When no tax-rate grid is attached the holding time defaults to one
/// and `ρ* = υ*`.
pub fn argmin_tax(sweep: &SweepResult) -> Result<(f64, f64)> {
    if sweep.estimates.is_empty() {
        return Err(invalid("cannot take the argmin of an empty sweep"));
    }
    let i = sweep.argmin_index;
    let upsilon = sweep.upsilon_grid[i];
    let rho = sweep.rho_grid.as_ref().map_or(upsilon, |r| r[i]);
    Ok((rho, upsilon))
}

/// Fill the path-major contribution table: slot `p·G + i` is path `p`'s
/// contribution at grid point `i`, a pure function of
/// `(master_seed, p, params, υ_i, method)`.
fn fill_contributions(
    measure: &PathMeasure,
    n: usize,
    upsilon_grid: &[f64],
    path_count: u64,
    master_seed: u64,
    method: Method,
) -> Result<Vec<f64>> {
    let g = upsilon_grid.len();
    let mut table = vec![0.0f64; path_count as usize * g];
    table
        .par_chunks_mut(CHUNK * g)
        .enumerate()
        .try_for_each(|(block, slots)| -> Result<()> {
            let mut signs = Vec::with_capacity(n);
            let mut values = Vec::with_capacity(n + 1);
            let mut classes = Vec::with_capacity(n);
            let base = block as u64 * CHUNK as u64;
            for (j, row) in slots.chunks_mut(g).enumerate() {
                SignSource::new(master_seed, base + j as u64).signs_into(n, &mut signs);
                for (slot, &upsilon) in row.iter_mut().zip(upsilon_grid) {
                    measure.simulate_and_classify(upsilon, |k| signs[k], &mut values, &mut classes);
                    *slot = measure.value_from_counts(&PathMeasure::counts(&classes), method)?;
                }
            }
            Ok(())
        })?;
    Ok(table)
}

/// Sequential two-pass mean and standard error over one grid point's stride.
fn mean_and_stderr(table: &[f64], g: usize, i: usize, path_count: u64) -> (f64, f64) {
    let nf = path_count as f64;
    let mut sum = 0.0;
    let mut p = i;
    while p < table.len() {
        sum += table[p];
        p += g;
    }
    let mean = sum / nf;
    let mut ss = 0.0;
    let mut p = i;
    while p < table.len() {
        let d = table[p] - mean;
        ss += d * d;
        p += g;
    }
    let var = ss / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

fn check_population(path_count: u64, grid_len: usize) -> Result<()> {
    if path_count < 2 {
        return Err(invalid(format!(
            "need at least 2 paths for a standard error, got {path_count}"
        )));
    }
    if path_count.saturating_mul(grid_len as u64) > MAX_SLOTS {
        return Err(invalid(format!(
            "{path_count} paths × {grid_len} grid points exceeds the \
             contribution-table cap of {MAX_SLOTS} slots"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of unfairness at one threshold: the sample mean of
/// per-path contributions over `path_count` independent sign streams.
///
/// Deterministic in `(seed, params, n, υ, path_count, method)` — repeated
/// calls return bit-identical estimates regardless of worker count.
pub fn estimate_unfairness(
    params: &ModelParams,
    n: usize,
    upsilon: f64,
    path_count: u64,
    master_seed: u64,
    method: Method,
) -> Result<UnfairnessEstimate> {
    let grid = [upsilon];
    check_grid(&grid)?;
    check_population(path_count, 1)?;
    let measure = PathMeasure::new(params, n)?;
    let table = fill_contributions(&measure, n, &grid, path_count, master_seed, method)?;
    let (value, stderr) = mean_and_stderr(&table, 1, 0, path_count);
    Ok(UnfairnessEstimate {
        value,
        stderr: Some(stderr),
        method,
        per_step: None,
        n,
        upsilon,
        path_count,
        seed: Some(master_seed),
    })
}

/// Common-random-numbers sweep across an ascending threshold grid.
///
/// Every sampled sign sequence drives one path per grid point, so the grid
/// shares a single path population. For the log methods the resulting
/// estimate curve is checked to be exactly nonincreasing — the coupling
/// makes that a pathwise certainty, so any violation is reported as a
/// property error, not noise.
///
/// # Examples
///
/// ```
/// use herding_tax::{coupled_sweep, DelayKernel, Method, ModelParams};
/// let p = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap();
/// let sweep = coupled_sweep(&p, 2, &[0.0, 0.5, 2.0], 4096, 7, Method::LogIndicator).unwrap();
/// assert!(sweep.monotone);
/// assert_eq!(sweep.argmin_upsilon(), 2.0);
/// ```
pub fn coupled_sweep(
    params: &ModelParams,
    n: usize,
    upsilon_grid: &[f64],
    path_count: u64,
    master_seed: u64,
    method: Method,
) -> Result<SweepResult> {
    check_grid(upsilon_grid)?;
    check_population(path_count, upsilon_grid.len())?;
    let measure = PathMeasure::new(params, n)?;
    let g = upsilon_grid.len();
    let table = fill_contributions(&measure, n, upsilon_grid, path_count, master_seed, method)?;

    let mut estimates = Vec::with_capacity(g);
    for (i, &upsilon) in upsilon_grid.iter().enumerate() {
        let (value, stderr) = mean_and_stderr(&table, g, i, path_count);
        estimates.push(UnfairnessEstimate {
            value,
            stderr: Some(stderr),
            method,
            per_step: None,
            n,
            upsilon,
            path_count,
            seed: Some(master_seed),
        });
    }

    let monotone = estimates.windows(2).all(|w| w[1].value <= w[0].value);
    if method.is_log() && !monotone {
        let (i, pair) = estimates
            .windows(2)
            .enumerate()
            .find(|(_, w)| w[1].value > w[0].value)
            .expect("a non-monotone sweep has a rising pair");
        return Err(Error::PropertyViolation(format!(
            "coupled {method} sweep rose from {} to {} between thresholds {} and {}",
            pair[0].value,
            pair[1].value,
            upsilon_grid[i],
            upsilon_grid[i + 1]
        )));
    }
    let mut flagged_pairs = Vec::new();
    if method == Method::PriceLevel {
        for (i, w) in estimates.windows(2).enumerate() {
            let rise = w[1].value - w[0].value;
            let allowance = 2.0 * (w[0].stderr.unwrap_or(0.0) + w[1].stderr.unwrap_or(0.0));
            if rise > allowance {
                flagged_pairs.push((i, i + 1));
            }
        }
    }

    let mut argmin_index = 0;
    for (i, e) in estimates.iter().enumerate() {
        if e.value <= estimates[argmin_index].value {
            argmin_index = i;
        }
    }

    Ok(SweepResult {
        n,
        method,
        path_count,
        master_seed,
        coupled: true,
        upsilon_grid: upsilon_grid.to_vec(),
        rho_grid: None,
        estimates,
        monotone,
        flagged_pairs,
        argmin_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DelayKernel;

    fn two_step_params() -> ModelParams {
        ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0).unwrap()).unwrap()
    }

    /// Drift gentle enough that threshold spacing 0.3 exceeds 4·max|α|,
    /// the sufficient condition for pathwise indicator domination.
    fn gentle_params() -> ModelParams {
        ModelParams::new(
            0.04,
            -0.04,
            1.0,
            DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn estimates_track_the_enumerated_two_step_values() {
        let p = two_step_params();
        for (upsilon, exact) in [(0.0, 0.5), (0.5, 0.25), (2.0, 0.0)] {
            let e = estimate_unfairness(&p, 2, upsilon, 20_000, 42, Method::LogIndicator).unwrap();
            let stderr = e.stderr.unwrap();
            assert!(
                (e.value - exact).abs() <= 4.0 * stderr + 1e-15,
                "estimate {} vs exact {exact} at threshold {upsilon} (stderr {stderr})",
                e.value
            );
        }
    }

    #[test]
    fn unreachable_threshold_estimates_exactly_zero() {
        let e =
            estimate_unfairness(&two_step_params(), 2, 1e12, 100, 9, Method::LogIndicator).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.stderr, Some(0.0));
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let p = gentle_params();
        let grid = [0.0, 0.3, 0.9];
        let a = coupled_sweep(&p, 50, &grid, 500, 11, Method::LogConditional).unwrap();
        let b = coupled_sweep(&p, 50, &grid, 500, 11, Method::LogConditional).unwrap();
        assert_eq!(a, b);
        // Compare at an interior threshold: at υ=0 symmetric drift fires on
        // every step with a nonzero gap, so all paths contribute the same
        // constant and any seed would give the same mean.
        let c = coupled_sweep(&p, 50, &grid, 500, 12, Method::LogConditional).unwrap();
        assert!(a.estimates[1].value != c.estimates[1].value);
    }

    #[test]
    fn worker_count_cannot_change_a_sweep() {
        let p = gentle_params();
        let grid = [0.0, 0.3, 0.9];
        let run = |workers| {
            with_worker_pool(workers, || {
                coupled_sweep(&p, 50, &grid, 512, 3, Method::LogIndicator).unwrap()
            })
            .unwrap()
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn coupled_log_sweeps_are_exactly_monotone() {
        let p = gentle_params();
        let grid = [0.0, 0.3, 0.6, 0.9, 1.2];
        let sweep = coupled_sweep(&p, 200, &grid, 2_000, 2024, Method::LogIndicator).unwrap();
        assert!(sweep.monotone);
        assert!(sweep.flagged_pairs.is_empty());
        assert_eq!(sweep.argmin_index, 4, "minimum sits at the right endpoint");
        for w in sweep.estimates.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        // The curve actually moves — the grid is not all in the dead zone.
        assert!(sweep.estimates[0].value > sweep.estimates[4].value);
    }

    #[test]
    fn price_level_sweeps_report_instead_of_failing() {
        let p = gentle_params();
        let sweep = coupled_sweep(&p, 50, &[0.0, 0.3, 0.9], 500, 5, Method::PriceLevel).unwrap();
        let values: Vec<f64> = sweep.estimates.iter().map(|e| e.value).collect();
        assert_eq!(
            sweep.monotone,
            values.windows(2).all(|w| w[1] <= w[0]),
            "monotone flag must describe the values as computed"
        );
        assert!(
            values.iter().all(|v| *v > 0.0),
            "noise floor keeps prices moving"
        );
    }

    #[test]
    fn argmin_favors_the_largest_minimal_threshold() {
        let p = gentle_params();
        // Dead grid: every estimate is exactly zero, so the tie rule decides.
        let mut sweep =
            coupled_sweep(&p, 20, &[1e9, 1e10, 1e11], 50, 1, Method::LogIndicator).unwrap();
        assert_eq!(sweep.argmin_index, 2);
        let (rho, upsilon) = argmin_tax(&sweep).unwrap();
        assert_eq!(upsilon, 1e11);
        assert_eq!(rho, 1e11, "unit holding time when no tax grid is attached");
        sweep.derive_rho_grid(4.0).unwrap();
        let (rho, upsilon) = argmin_tax(&sweep).unwrap();
        assert_eq!((rho, upsilon), (0.25e11, 1e11));
    }

    #[test]
    fn stderr_shrinks_like_the_square_root_of_the_path_count() {
        let p = gentle_params();
        let se = |paths| {
            estimate_unfairness(&p, 50, 0.3, paths, 77, Method::LogIndicator)
                .unwrap()
                .stderr
                .unwrap()
        };
        let ratio = se(2_000) / se(8_000);
        assert!(
            (1.33..=3.0).contains(&ratio),
            "quadrupling paths should roughly halve the standard error, ratio {ratio}"
        );
    }

    #[test]
    fn populations_and_grids_are_validated() {
        let p = gentle_params();
        assert!(estimate_unfairness(&p, 2, 0.0, 1, 0, Method::LogIndicator).is_err());
        assert!(coupled_sweep(&p, 2, &[0.5, 0.2], 100, 0, Method::LogIndicator).is_err());
        assert!(coupled_sweep(&p, 2, &[], 100, 0, Method::LogIndicator).is_err());
        assert!(matches!(
            coupled_sweep(&p, 2, &[0.0], u64::MAX, 0, Method::LogIndicator),
            Err(Error::InvalidInput(_))
        ));
        assert!(argmin_tax(&SweepResult {
            n: 2,
            method: Method::LogIndicator,
            path_count: 2,
            master_seed: 0,
            coupled: true,
            upsilon_grid: vec![],
            rho_grid: None,
            estimates: vec![],
            monotone: true,
            flagged_pairs: vec![],
            argmin_index: 0,
        })
        .is_err());
    }
}
