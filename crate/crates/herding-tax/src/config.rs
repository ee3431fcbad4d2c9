//! Experiment configuration: a single JSON document naming the model, the
//! tax under study, and the run parameters.
//!
//! Numbers are plain JSON doubles, kernel entries are two-element
//! `[lag, weight]` arrays, and grids may be given either explicitly or as an
//! inclusive `"start:stop:count"` shorthand. The document round-trips
//! losslessly through serialization, and unknown keys are rejected rather
//! than ignored — a typo in an experiment file should fail loudly, not run
//! the wrong experiment.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::check_grid;
use crate::model::{DelayKernel, ModelParams, NoiseScaling};
use crate::unfairness::Method;

/// A threshold or tax-rate grid: explicit points, or an inclusive evenly
/// spaced `"start:stop:count"` shorthand whose endpoints are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    /// `"start:stop:count"`, expanded inclusively and evenly.
    Shorthand(String),
    /// Explicit grid points, ascending.
    Explicit(Vec<f64>),
}

impl GridSpec {
    /// Expand to concrete grid points.
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Explicit(points) => Ok(points.clone()),
            GridSpec::Shorthand(text) => expand_shorthand(text),
        }
    }
}

fn expand_shorthand(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(invalid(format!(
            "grid shorthand must be start:stop:count, got {text:?}"
        )));
    };
    let start: f64 = start
        .trim()
        .parse()
        .map_err(|_| invalid(format!("grid start {start:?} is not a number")))?;
    let stop: f64 = stop
        .trim()
        .parse()
        .map_err(|_| invalid(format!("grid stop {stop:?} is not a number")))?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| invalid(format!("grid count {count:?} is not a positive integer")))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(invalid(format!(
            "grid endpoints must be finite, got {text:?}"
        )));
    }
    if count == 0 {
        return Err(invalid("grid count must be at least 1"));
    }
    if stop < start {
        return Err(invalid(format!(
            "grid stop {stop} lies below start {start}"
        )));
    }
    if count == 1 {
        if start != stop {
            return Err(invalid(format!(
                "a single-point grid cannot span {start}..{stop}"
            )));
        }
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut points: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
    // The arithmetic above lands near the endpoints; pin them exactly.
    points[0] = start;
    points[count - 1] = stop;
    Ok(points)
}

/// The model block: drift levels, noise, kernel, initial value, scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub alpha_up: f64,
    pub alpha_down: f64,
    #[serde(default)]
    pub alpha_zero: f64,
    pub sigma: f64,
    /// Kernel entries as `[lag, weight]` pairs.
    pub kernel: Vec<[f64; 2]>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub scaling: NoiseScaling,
}

impl ModelSection {
    /// Validated model parameters.
    pub fn to_params(&self) -> Result<ModelParams> {
        let pairs: Vec<(f64, f64)> = self.kernel.iter().map(|e| (e[0], e[1])).collect();
        let params = ModelParams::new(
            self.alpha_up,
            self.alpha_down,
            self.sigma,
            DelayKernel::from_pairs(&pairs)?,
        )?
        .with_alpha_zero(self.alpha_zero)
        .with_x0(self.x0)
        .with_scaling(self.scaling);
        params.validate()?;
        Ok(params)
    }
}

impl Default for ModelSection {
    /// The reference model used throughout the documentation: unit drift
    /// levels, unit noise, and buy/sell pressure measured against the
    /// average of the quarter- and half-period lagged prices.
    fn default() -> Self {
        ModelSection {
            alpha_up: 1.0,
            alpha_down: -1.0,
            alpha_zero: 0.0,
            sigma: 1.0,
            kernel: vec![[0.25, 0.5], [0.5, 0.5]],
            x0: 0.0,
            scaling: NoiseScaling::Standard,
        }
    }
}

fn default_holding_time() -> f64 {
    1.0
}

/// The tax block: a single rate or a rate grid, the holding time converting
/// rates to inaction thresholds (`υ = T·ρ`), and the optional real-economy
/// bound `S` that sweep grids must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxSection {
    /// Single round-trip tax rate; exclusive with `rho_grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Tax-rate grid; exclusive with `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<GridSpec>,
    /// Representative holding time `T > 0`.
    #[serde(default = "default_holding_time")]
    pub holding_time: f64,
    /// Largest admissible tax rate; rates beyond it are refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_max: Option<f64>,
}

impl Default for TaxSection {
    fn default() -> Self {
        TaxSection {
            rho: None,
            rho_grid: Some(GridSpec::Shorthand("0:1.5:16".into())),
            holding_time: 1.0,
            sweep_max: Some(1.5),
        }
    }
}

fn default_n() -> usize {
    12
}

fn default_path_count() -> u64 {
    10_000
}

fn default_method() -> Method {
    Method::LogIndicator
}

/// The run block: mesh, path budget, seed, method, workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Mesh steps per unit time.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Monte Carlo paths per grid point.
    #[serde(default = "default_path_count")]
    pub path_count: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Worker threads; `0` uses every available core.
    #[serde(default)]
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            n: default_n(),
            path_count: default_path_count(),
            master_seed: 0,
            method: default_method(),
            workers: 0,
        }
    }
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub tax: TaxSection,
    #[serde(default)]
    pub run: RunSection,
}

/// A validated, fully expanded experiment: concrete parameters and grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub params: ModelParams,
    /// Inaction thresholds, ascending — `upsilon_grid[i] = T·rho_grid[i]`.
    pub upsilon_grid: Vec<f64>,
    /// Tax rates, ascending, same length as `upsilon_grid`.
    pub rho_grid: Vec<f64>,
    pub holding_time: f64,
    pub n: usize,
    pub path_count: u64,
    pub master_seed: u64,
    pub method: Method,
    pub workers: usize,
}

impl RunConfig {
    /// Parse a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Load a JSON document from a file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    /// Serialize back to pretty JSON.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Resolve the experiment the tax block describes: the rate grid comes
    /// from `tax.rho` or `tax.rho_grid` (exactly one must be present) and
    /// thresholds are derived as `υ = T·ρ`.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let rho_grid = match (&self.tax.rho, &self.tax.rho_grid) {
            (Some(_), Some(_)) => {
                return Err(invalid("tax block sets both rho and rho_grid; pick one"))
            }
            (None, None) => return Err(invalid("tax block needs one of rho or rho_grid")),
            (Some(rho), None) => vec![*rho],
            (None, Some(grid)) => grid.points()?,
        };
        self.check_rates(&rho_grid)?;
        let upsilon_grid: Vec<f64> = rho_grid
            .iter()
            .map(|&rho| crate::model::threshold_from_tax(rho, self.tax.holding_time))
            .collect::<Result<_>>()?;
        check_grid(&upsilon_grid)?;
        self.finish(upsilon_grid, rho_grid)
    }

    /// Resolve with the threshold grid given directly, bypassing the tax
    /// block's rate source; rates are reported as `ρ = υ/T`.
    pub fn resolve_with_thresholds(&self, grid: &GridSpec) -> Result<ResolvedRun> {
        let upsilon_grid = grid.points()?;
        check_grid(&upsilon_grid)?;
        let holding_time = self.tax.holding_time;
        if !holding_time.is_finite() || holding_time <= 0.0 {
            return Err(invalid(format!(
                "holding time must be finite and positive, got {holding_time}"
            )));
        }
        let rho_grid: Vec<f64> = upsilon_grid.iter().map(|u| u / holding_time).collect();
        self.check_rates(&rho_grid)?;
        self.finish(upsilon_grid, rho_grid)
    }

    fn check_rates(&self, rho_grid: &[f64]) -> Result<()> {
        if rho_grid.is_empty() {
            return Err(invalid("tax-rate grid must not be empty"));
        }
        for &rho in rho_grid {
            if !rho.is_finite() || rho < 0.0 {
                return Err(invalid(format!(
                    "tax rates must be finite and nonnegative, got {rho}"
                )));
            }
            if let Some(sweep_max) = self.tax.sweep_max {
                if rho > sweep_max {
                    return Err(invalid(format!(
                        "tax rate {rho} exceeds the sweep bound {sweep_max}"
                    )));
                }
            }
        }
        if rho_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("tax-rate grid must be ascending"));
        }
        Ok(())
    }

    fn finish(&self, upsilon_grid: Vec<f64>, rho_grid: Vec<f64>) -> Result<ResolvedRun> {
        Ok(ResolvedRun {
            params: self.model.to_params()?,
            upsilon_grid,
            rho_grid,
            holding_time: self.tax.holding_time,
            n: self.run.n,
            path_count: self.run.path_count,
            master_seed: self.run.master_seed,
            method: self.run.method,
            workers: self.run.workers,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_reference_config_round_trips_and_resolves() {
        let config = RunConfig::default();
        let text = config.to_json_string().unwrap();
        let reparsed = RunConfig::from_json_str(&text).unwrap();
        assert_eq!(config, reparsed);

        let run = config.resolve().unwrap();
        assert_eq!(run.upsilon_grid.len(), 16);
        assert_eq!(run.upsilon_grid[0], 0.0);
        assert_eq!(run.upsilon_grid[15], 1.5);
        assert_eq!(run.rho_grid, run.upsilon_grid, "unit holding time");
        assert_eq!(run.n, 12);
        assert_eq!(run.method, Method::LogIndicator);
    }

    #[test]
    fn a_literal_document_parses_with_array_kernel_entries() {
        let text = r#"{
            "model": {
                "alpha_up": 0.5, "alpha_down": -0.75, "sigma": 2.0,
                "kernel": [[0.25, 0.5], [0.5, 0.5]],
                "scaling": "paper"
            },
            "tax": { "rho": 0.3, "holding_time": 2.0, "sweep_max": 1.0 },
            "run": { "n": 100, "path_count": 5000, "master_seed": 7, "method": "price-level" }
        }"#;
        let run = RunConfig::from_json_str(text).unwrap().resolve().unwrap();
        assert_eq!(run.params.alpha_down, -0.75);
        assert_eq!(run.params.scaling, NoiseScaling::Paper);
        assert_eq!(run.params.kernel.step_lags(100), vec![(25, 0.5), (50, 0.5)]);
        assert_eq!(run.upsilon_grid, vec![0.6], "υ = T·ρ");
        assert_eq!(run.rho_grid, vec![0.3]);
        assert_eq!(run.method, Method::PriceLevel);
        assert_eq!(run.workers, 0, "defaulted");
    }

    #[test]
    fn unknown_keys_are_rejected_loudly() {
        let text = r#"{ "model": { "alpha_up": 1.0, "alpha_down": -1.0, "sigma": 1.0,
            "kernel": [[1.0, 1.0]], "typo_field": 3 } }"#;
        assert!(RunConfig::from_json_str(text).is_err());
    }

    #[test]
    fn shorthand_grids_expand_inclusively_with_exact_endpoints() {
        let grid = GridSpec::Shorthand("0:1.5:16".into()).points().unwrap();
        assert_eq!(grid.len(), 16);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[15], 1.5);
        let spacing = grid[1] - grid[0];
        for w in grid.windows(2) {
            assert!((w[1] - w[0] - spacing).abs() < 1e-12, "even spacing");
        }

        assert_eq!(
            GridSpec::Shorthand("2:2:1".into()).points().unwrap(),
            vec![2.0]
        );
        assert_eq!(
            GridSpec::Shorthand("0:1:2".into()).points().unwrap(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn malformed_shorthands_are_refused() {
        for bad in [
            "0:1", "a:1:3", "0:b:3", "0:1:x", "1:0:5", "0:1:0", "0:2:1", "0:1:2:3",
        ] {
            assert!(
                GridSpec::Shorthand(bad.into()).points().is_err(),
                "{bad:?} should not parse"
            );
        }
    }

    #[test]
    fn the_tax_block_needs_exactly_one_rate_source() {
        let mut config = RunConfig::default();
        config.tax.rho = Some(0.5);
        assert!(config.resolve().is_err(), "both sources set");
        config.tax.rho = None;
        config.tax.rho_grid = None;
        assert!(config.resolve().is_err(), "no source set");
    }

    #[test]
    fn the_sweep_bound_is_enforced_on_both_resolve_paths() {
        let mut config = RunConfig::default();
        config.tax.rho = Some(2.0);
        config.tax.rho_grid = None;
        let err = config.resolve().unwrap_err().to_string();
        assert!(err.contains("sweep bound"), "{err}");

        // Thresholds convert to rates before the bound check: υ = 4 at
        // T = 2 is ρ = 2, over the bound of 1.5.
        config.tax.rho = None;
        config.tax.holding_time = 2.0;
        let direct = config.resolve_with_thresholds(&GridSpec::Explicit(vec![4.0]));
        assert!(direct.is_err());
        let ok = config
            .resolve_with_thresholds(&GridSpec::Explicit(vec![0.0, 3.0]))
            .unwrap();
        assert_eq!(ok.rho_grid, vec![0.0, 1.5]);
        assert_eq!(ok.upsilon_grid, vec![0.0, 3.0]);
    }

    #[test]
    fn threshold_resolution_keeps_the_given_grid_verbatim() {
        let mut config = RunConfig::default();
        config.tax.holding_time = 3.0;
        config.tax.sweep_max = None;
        let run = config
            .resolve_with_thresholds(&GridSpec::Explicit(vec![0.0, 0.3, 0.9]))
            .unwrap();
        // Dividing by three and multiplying back would perturb 0.3 in the
        // last bit; the threshold grid must stay exactly as requested.
        assert_eq!(run.upsilon_grid, vec![0.0, 0.3, 0.9]);
        assert_eq!(run.rho_grid, vec![0.0, 0.3 / 3.0, 0.9 / 3.0]);
    }

    #[test]
    fn an_empty_document_is_the_reference_experiment() {
        let config = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(config, RunConfig::default());
    }
}
