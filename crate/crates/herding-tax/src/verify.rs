//! Built-in verification: re-derives the library's mathematical guarantees
//! on reference configurations and reports pass/fail per suite.
//!
//! Five suites run at either level; `full` widens them to large meshes and
//! the exhaustive small-mesh checks:
//!
//! * **formula-equivalence** — the indicator and conditional log forms agree
//!   path by path to association error.
//! * **coupling** — under common signs, a higher threshold never fires more
//!   indicators than a lower one on any prefix (checked in the
//!   gentle-drift regime where this holds pathwise; see the module docs of
//!   [`crate::lattice`]).
//! * **monotonicity** — exact and coupled Monte Carlo sweeps of the log
//!   unfairness are nonincreasing in the threshold with the minimum at the
//!   right endpoint.
//! * **martingale-limit** — the price-level noise floor vanishes like
//!   `σ⁴/(12n)` under standard scaling and approaches `σ²/4` under the
//!   halved-variance `paper` step size.
//! * **oracle-agreement** — hand-computed recursion values, the enumerated
//!   two-step table, and Monte Carlo versus exhaustive enumeration.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::exact::{enumerate_unfairness, exact_sweep};
use crate::lattice::{
    prefix_indicator_counts, prefix_violations, simulate_coupled, step, SignSource,
};
use crate::mc::{coupled_sweep, estimate_unfairness};
use crate::model::{delay_gap, DelayKernel, ModelParams, NoiseScaling};
use crate::unfairness::{Method, PathMeasure};

/// How much work the verification invests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    /// Seconds: moderate meshes and path budgets.
    Quick,
    /// Minutes: large meshes, exhaustive small-mesh checks, bigger budgets.
    Full,
}

impl fmt::Display for VerifyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyLevel::Quick => "quick",
            VerifyLevel::Full => "full",
        })
    }
}

impl FromStr for VerifyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(VerifyLevel::Quick),
            "full" => Ok(VerifyLevel::Full),
            other => Err(invalid(format!(
                "verification level must be quick or full, got {other:?}"
            ))),
        }
    }
}

/// One suite's verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// What was checked, or what failed.
    pub detail: String,
}

impl SuiteOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        SuiteOutcome {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        SuiteOutcome {
            name,
            passed: false,
            detail: detail.into(),
        }
    }

    fn from_check(name: &'static str, check: Result<String>) -> Self {
        match check {
            Ok(detail) => Self::pass(name, detail),
            Err(e) => Self::fail(name, e.to_string()),
        }
    }
}

/// The full verification verdict.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(
                f,
                "{} {:<20} {}",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.detail
            )?;
        }
        write!(
            f,
            "verification {}: {}",
            self.level,
            if self.passed {
                "all suites passed"
            } else {
                "FAILED"
            }
        )
    }
}

/// Reference model: unit drift levels against the quarter/half-lag average.
fn reference_params() -> ModelParams {
    ModelParams::new(
        1.0,
        -1.0,
        1.0,
        DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)]).unwrap(),
    )
    .unwrap()
}

/// Gentle variant: drift small enough against the grid spacing (0.3 >
/// 4·max|α|) that indicator domination holds pathwise, not just on average.
fn gentle_params() -> ModelParams {
    ModelParams::new(
        0.04,
        -0.04,
        1.0,
        DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)]).unwrap(),
    )
    .unwrap()
}

/// Largest gap between the two log forms across a sampled path population.
fn log_forms_max_gap(
    measure: &PathMeasure,
    upsilon: f64,
    path_count: u64,
    master_seed: u64,
    n: usize,
) -> Result<f64> {
    let mut signs = Vec::new();
    let mut values = Vec::new();
    let mut classes = Vec::new();
    let mut max_gap = 0.0f64;
    for p in 0..path_count {
        SignSource::new(master_seed, p).signs_into(n, &mut signs);
        measure.simulate_and_classify(upsilon, |k| signs[k], &mut values, &mut classes);
        let counts = PathMeasure::counts(&classes);
        let a = measure.value_from_counts(&counts, Method::LogIndicator)?;
        let b = measure.value_from_counts(&counts, Method::LogConditional)?;
        max_gap = max_gap.max((a - b).abs());
    }
    Ok(max_gap)
}

fn formula_equivalence(level: VerifyLevel) -> SuiteOutcome {
    const NAME: &str = "formula-equivalence";
    let configs: &[(usize, u64)] = match level {
        VerifyLevel::Quick => &[(96, 40), (500, 5)],
        VerifyLevel::Full => &[(96, 40), (500, 20), (1000, 20)],
    };
    let check = || -> Result<String> {
        let mut worst = 0.0f64;
        for params in [reference_params(), gentle_params()] {
            for &(n, paths) in configs {
                let measure = PathMeasure::new(&params, n)?;
                for upsilon in [0.0, 0.2, 0.7] {
                    let gap = log_forms_max_gap(&measure, upsilon, paths, 90_210, n)?;
                    worst = worst.max(gap);
                    if gap > 1e-12 {
                        return Err(Error::PropertyViolation(format!(
                            "log forms disagree by {gap:e} at n={n}, threshold {upsilon}"
                        )));
                    }
                }
            }
        }
        Ok(format!(
            "largest gap between log forms {worst:e} (tolerance 1e-12)"
        ))
    };
    SuiteOutcome::from_check(NAME, check())
}

fn coupling(level: VerifyLevel) -> SuiteOutcome {
    const NAME: &str = "coupling";
    let params = gentle_params();
    let grid = [0.0, 0.3, 0.6, 0.9, 1.2];
    // Checks one coupled sign sequence against every threshold pair and
    // returns how many pairs it certified.
    let check_sequence = |signs: &[i8], n: usize, label: &str| -> Result<u64> {
        let coupled = simulate_coupled(&params, n, signs, &grid)?;
        let counts: Vec<_> = coupled
            .iter()
            .map(|path| prefix_indicator_counts(path, &params))
            .collect();
        let mut pairs = 0;
        for i in 0..counts.len() {
            for j in i + 1..counts.len() {
                let v = prefix_violations(&counts[i], &counts[j]);
                if v > 0 {
                    return Err(Error::PropertyViolation(format!(
                        "{v} prefix-count violations between thresholds {} and {} \
                         at n={n} ({label})",
                        grid[i], grid[j]
                    )));
                }
                pairs += 1;
            }
        }
        Ok(pairs)
    };
    let run_population = |n: usize, paths: u64, seed: u64| -> Result<u64> {
        let mut signs = Vec::new();
        let mut pairs = 0;
        for p in 0..paths {
            SignSource::new(seed, p).signs_into(n, &mut signs);
            pairs += check_sequence(&signs, n, &format!("path {p}"))?;
        }
        Ok(pairs)
    };
    let check = || -> Result<String> {
        let mut checked = 0u64;
        match level {
            VerifyLevel::Quick => checked += run_population(200, 200, 41)?,
            VerifyLevel::Full => {
                // Exhaustive over the whole sign space at a small mesh…
                let n = 12;
                let mut signs = vec![0i8; n];
                for index in 0u64..1 << n {
                    for (k, s) in signs.iter_mut().enumerate() {
                        *s = if index >> k & 1 == 1 { 1 } else { -1 };
                    }
                    checked += check_sequence(&signs, n, &format!("sign index {index}"))?;
                }
                // …and sampled at the mesh sizes real experiments use.
                checked += run_population(1000, 10_000, 20_240_816)?;
            }
        }
        Ok(format!(
            "{checked} coupled threshold pairs, zero prefix violations"
        ))
    };
    SuiteOutcome::from_check(NAME, check())
}

fn monotonicity(level: VerifyLevel) -> SuiteOutcome {
    const NAME: &str = "monotonicity";
    let check = || -> Result<String> {
        // Exact: strong symmetric herding, where per-family indicator counts
        // are known to exchange between grid points and only the weighted
        // value is guaranteed to fall.
        let (n_exact, points) = match level {
            VerifyLevel::Quick => (10, 20),
            VerifyLevel::Full => (12, 50),
        };
        let grid: Vec<f64> = (0..points)
            .map(|i| i as f64 * 1.5 / (points - 1) as f64)
            .collect();
        let table = exact_sweep(&reference_params(), n_exact, &grid)?;
        if !table.is_nonincreasing() {
            return Err(Error::PropertyViolation(
                "exact sweep of the reference model is not nonincreasing".into(),
            ));
        }
        if table.argmin_index() != grid.len() - 1 {
            return Err(Error::PropertyViolation(format!(
                "exact argmin at grid index {} instead of the right endpoint",
                table.argmin_index()
            )));
        }

        // Coupled Monte Carlo at a large mesh (the sweep itself refuses a
        // non-monotone log curve; reaching here means it held).
        let (n_mc, paths) = match level {
            VerifyLevel::Quick => (200, 2_000),
            VerifyLevel::Full => (1000, 10_000),
        };
        let sweep = coupled_sweep(
            &gentle_params(),
            n_mc,
            &[0.0, 0.3, 0.6, 0.9, 1.2],
            paths,
            2024,
            Method::LogIndicator,
        )?;
        if sweep.argmin_index != sweep.upsilon_grid.len() - 1 {
            return Err(Error::PropertyViolation(format!(
                "coupled argmin at grid index {} instead of the right endpoint",
                sweep.argmin_index
            )));
        }
        Ok(format!(
            "exact {}-point sweep at n={n_exact} and coupled {}-path sweep at \
             n={n_mc} both nonincreasing with argmin at the bound",
            grid.len(),
            paths
        ))
    };
    SuiteOutcome::from_check(NAME, check())
}

fn martingale_limit(_level: VerifyLevel) -> SuiteOutcome {
    const NAME: &str = "martingale-limit";
    let check = || -> Result<String> {
        let dead = 1e12;
        let paths = 3;
        let mut results = Vec::new();
        for scaling in [NoiseScaling::Standard, NoiseScaling::Paper] {
            let params = reference_params().with_scaling(scaling);
            let mut per_n = Vec::new();
            for n in [100usize, 400] {
                let h = scaling.step_size(n);
                let closed = n as f64 * (h.cosh() * (-1.0 / (2.0 * n as f64)).exp() - 1.0).abs();
                // The noise floor is path-independent; a few paths confirm it.
                for p in 0..paths {
                    let e = estimate_unfairness(&params, n, dead, p + 2, 5, Method::PriceLevel)?;
                    if (e.value - closed).abs() > 1e-12 {
                        return Err(Error::PropertyViolation(format!(
                            "dead-drift price level {} differs from closed form {closed}",
                            e.value
                        )));
                    }
                }
                per_n.push(closed);
            }
            results.push((scaling, per_n[0], per_n[1]));
        }
        let (_, std100, std400) = results[0];
        let ratio = std100 / std400;
        if !(3.2..=4.8).contains(&ratio) {
            return Err(Error::PropertyViolation(format!(
                "standard-scaling noise floor fell by {ratio:.3}× from n=100 to \
                 n=400; expected ≈4× (like σ⁴/(12n))"
            )));
        }
        let (_, paper100, paper400) = results[1];
        for (n, v) in [(100, paper100), (400, paper400)] {
            if (v - 0.25).abs() > 0.02 {
                return Err(Error::PropertyViolation(format!(
                    "paper-scaling noise floor at n={n} is {v}, not near σ²/4"
                )));
            }
        }
        Ok(format!(
            "standard floor {std100:.3e} → {std400:.3e} (ratio {ratio:.2}); \
             paper-scaling floor stays at {paper100:.3} ≈ σ²/4"
        ))
    };
    SuiteOutcome::from_check(NAME, check())
}

fn oracle_agreement(level: VerifyLevel) -> SuiteOutcome {
    const NAME: &str = "oracle-agreement";
    let check = || -> Result<String> {
        // Hand-evaluated single steps: drift dead, so the increment is
        // noise minus compensator.
        let dead = 1e12;
        let params = reference_params();
        let x = step(&[0.0], 1, dead, &params, 4)?;
        if x != 0.5 - 0.125 {
            return Err(Error::PropertyViolation(format!(
                "standard-scaling step returned {x}, expected 0.375"
            )));
        }
        let paper = reference_params().with_scaling(NoiseScaling::Paper);
        let x = step(&[0.0], 1, dead, &paper, 4)?;
        let expected = 1.0 / 8.0f64.sqrt() - 0.125;
        if x != expected {
            return Err(Error::PropertyViolation(format!(
                "paper-scaling step returned {x}, expected {expected}"
            )));
        }

        // First step of the two-step worked example: zero gap at zero
        // threshold, so only noise and compensator move the price.
        let two = ModelParams::new(1.0, -1.0, 1.0, DelayKernel::single(1.0)?)?;
        let x1 = step(&[0.0], 1, 0.0, &two, 2)?;
        let expected = 1.0 / 2.0f64.sqrt() - 0.25;
        if x1 != expected {
            return Err(Error::PropertyViolation(format!(
                "worked-example first step returned {x1}, expected {expected}"
            )));
        }

        // Delay gap against the lagged average, by hand.
        let values = [0.8, f64::NAN, 0.4, f64::NAN, 0.2];
        let gap = delay_gap(&values, 4, &params.kernel, 8);
        if (gap - -0.4).abs() > 1e-15 {
            return Err(Error::PropertyViolation(format!(
                "delay gap returned {gap}, expected -0.4"
            )));
        }

        // The enumerated two-step table.
        let table = exact_sweep(&two, 2, &[0.0, 0.5, 2.0])?;
        if table.values != [0.5, 0.25, 0.0] {
            return Err(Error::PropertyViolation(format!(
                "two-step exact sweep returned {:?}, expected [0.5, 0.25, 0]",
                table.values
            )));
        }

        // Monte Carlo against exhaustive enumeration on an enumerable mesh.
        let paths = match level {
            VerifyLevel::Quick => 4_000,
            VerifyLevel::Full => 100_000,
        };
        let mut worst = 0.0f64;
        for upsilon in [0.0, 0.4, 0.8] {
            let exact = enumerate_unfairness(&params, 12, upsilon, Method::LogIndicator)?;
            let mc = estimate_unfairness(&params, 12, upsilon, paths, 31, Method::LogIndicator)?;
            let stderr = mc.stderr.expect("sampled estimates carry a standard error");
            let gap = (mc.value - exact.value).abs();
            if gap > 4.0 * stderr + 1e-15 {
                return Err(Error::PropertyViolation(format!(
                    "Monte Carlo mean {} is {gap:e} from the exact value {} \
                     (4·stderr = {:e}) at threshold {upsilon}",
                    mc.value,
                    exact.value,
                    4.0 * stderr
                )));
            }
            worst = worst.max(if stderr > 0.0 { gap / stderr } else { 0.0 });
        }
        Ok(format!(
            "hand oracles exact; Monte Carlo within {worst:.2}·stderr of enumeration"
        ))
    };
    SuiteOutcome::from_check(NAME, check())
}

/// Run every verification suite at the given level.
pub fn run_verification(level: VerifyLevel) -> VerifyReport {
    let suites = vec![
        formula_equivalence(level),
        coupling(level),
        monotonicity(level),
        martingale_limit(level),
        oracle_agreement(level),
    ];
    let passed = suites.iter().all(|s| s.passed);
    VerifyReport {
        level,
        passed,
        suites,
    }
}
