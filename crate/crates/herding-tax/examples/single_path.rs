//! Simulate one log-price path and read its unfairness three ways.
//!
//! A path is driven by a reproducible sign stream, checked against the
//! recursion it claims to follow, and then scored by each of the three
//! discrepancy measures: the log-indicator form (counts drift activity),
//! the log-conditional form (averages the drift magnitude), and the
//! price-level form (distance of the compensated price from a martingale).
//! The per-step breakdown shows exactly which steps contribute.
//!
//! Run with: `cargo run --example single_path`

use herding_tax::{
    path_unfairness, path_unfairness_per_step, simulate_path, DelayKernel, Method, ModelParams,
    SignSource,
};

fn main() -> herding_tax::Result<()> {
    let kernel = DelayKernel::from_pairs(&[(0.25, 0.5), (0.5, 0.5)])?;
    let params = ModelParams::new(1.0, -1.0, 1.0, kernel)?;
    let n = 16;
    let upsilon = 0.4;

    // Signs come from a counter-based stream: (seed, path index) alone
    // determine every step, so the path below is fully reproducible.
    let signs = SignSource::new(7, 0).signs(n);
    let path = simulate_path(&params, n, &signs, upsilon)?;
    path.verify(&params)?;

    println!("mesh n = {n}, threshold upsilon = {upsilon}, seed (7, path 0)");
    println!("{:>4}  {:>5}  {:>9}  {:>9}", "step", "sign", "X_k", "gap");
    for k in 0..=n {
        let gap = if k < n {
            format!("{:>9.4}", path.delay_gap(k, &params))
        } else {
            " ".repeat(9)
        };
        let sign = if k < n {
            format!("{:>+5}", path.signs[k])
        } else {
            " ".repeat(5)
        };
        println!("{k:>4}  {sign}  {:>9.4}  {gap}", path.values[k]);
    }

    println!("\nunfairness of this one path:");
    for method in [
        Method::LogIndicator,
        Method::LogConditional,
        Method::PriceLevel,
    ] {
        let value = path_unfairness(&path, &params, method)?;
        println!("  {:<16} {value:.6}", method.as_str());
    }

    // The log-indicator value is the weighted count of steps whose drift
    // fired; its per-step terms are 0/1 flags, and the value is their
    // average over the mesh.
    let per_step = path_unfairness_per_step(&path, &params, Method::LogIndicator)?;
    let fired: Vec<usize> = per_step
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > 0.0)
        .map(|(k, _)| k)
        .collect();
    let value = per_step.iter().sum::<f64>() * Method::LogIndicator.per_step_weight(n);
    println!("\nlog-indicator breakdown: value = {value:.6}");
    println!(
        "steps with active drift: {fired:?} ({} of {n})",
        fired.len()
    );
    Ok(())
}
