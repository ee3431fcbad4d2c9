//! From tax rate to inaction threshold to drift.
//!
//! A proportional transaction tax at rate `rho`, paid on a round trip held
//! for time `T`, only leaves room for a profitable trade when the observed
//! price gap clears `upsilon = T * rho`. Below that threshold the rational
//! response is to sit still. This example walks the chain: pick a tax, derive
//! the threshold, and show how the piecewise drift responds to delay gaps on
//! either side of it.
//!
//! Run with: `cargo run --example threshold_and_drift`

use herding_tax::{
    classify_gap, delay_gap, psi, threshold_from_tax, DelayKernel, DriftClass, ModelParams,
};

fn main() -> herding_tax::Result<()> {
    // A 30% round-trip tax on positions held for two units of time.
    let rho = 0.3;
    let holding_time = 2.0;
    let upsilon = threshold_from_tax(rho, holding_time)?;
    println!("tax rate rho = {rho}, holding time T = {holding_time}");
    println!("inaction threshold upsilon = T * rho = {upsilon}\n");

    // Herding model: chase upward gaps at rate 1, flee downward gaps at the
    // same rate, look back a quarter and a half of a unit of time.
    let kernel = DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)])?;
    let params = ModelParams::new(1.0, -1.0, 1.0, kernel)?;

    // The drift is a step function of the delay gap: zero strictly inside
    // (-upsilon, upsilon), alpha_up at or above upsilon, alpha_down at or
    // below -upsilon. Scan gaps across the threshold to see the switch.
    println!("{:>8}  {:>10}  {:>6}", "gap", "class", "drift");
    for gap in [-1.0, -0.6, -0.59, 0.0, 0.59, 0.6, 1.0] {
        let class = classify_gap(gap, upsilon);
        let drift = psi(gap, upsilon, &params);
        println!("{gap:>8.2}  {:>10}  {drift:>6.2}", label(class));
    }

    // The gap itself compares the current log price with a delayed average.
    // With the two-lag kernel above and n = 8 steps per unit time, the
    // lags land 2 and 4 steps back.
    let n = 8;
    let history = [0.10, 0.16, 0.12, 0.20, 0.26];
    let k = history.len() - 1;
    let gap = delay_gap(&history, k, &params.kernel, n);
    println!(
        "\nmesh n = {n}: kernel lags fall {:?} steps back",
        lag_steps(&params, n)
    );
    println!("history = {history:?}");
    println!(
        "gap at step {k} = X_{k} - (0.5 * X_{} + 0.5 * X_{}) = {gap:.4}",
        k.saturating_sub(2),
        k.saturating_sub(4),
    );
    println!(
        "classified as {} at upsilon = {upsilon}",
        label(classify_gap(gap, upsilon))
    );
    Ok(())
}

fn label(class: DriftClass) -> &'static str {
    match class {
        DriftClass::Up => "up",
        DriftClass::Down => "down",
        DriftClass::Zero => "zero-gap",
        DriftClass::Silent => "inactive",
    }
}

fn lag_steps(params: &ModelParams, n: usize) -> Vec<usize> {
    params
        .kernel
        .step_lags(n)
        .into_iter()
        .map(|(lag, _)| lag)
        .collect()
}
