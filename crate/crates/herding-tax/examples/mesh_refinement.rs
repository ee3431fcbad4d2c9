//! How the price-level noise floor behaves as the mesh is refined.
//!
//! With the drift silenced (threshold far beyond any reachable gap) the
//! price-level unfairness is path independent and equals the martingale
//! defect of one compensated noise step, summed over the mesh. Under the
//! standard step size sigma/sqrt(n) that defect shrinks like
//! sigma^4 / (12 n): quadrupling the mesh quarters the floor, so the
//! discrete price converges to a martingale. An alternative convention with
//! step size sigma/sqrt(2n) leaves a floor near sigma^2/4 that refinement
//! cannot remove — the compensator never matches the noise.
//!
//! Run with: `cargo run --example mesh_refinement`

use herding_tax::{estimate_unfairness, DelayKernel, Method, ModelParams, NoiseScaling};

fn main() -> herding_tax::Result<()> {
    let kernel = DelayKernel::single(0.5)?;
    let sigma = 1.0;
    let dead = 1e12; // far beyond any reachable gap: drift never fires

    println!("price-level unfairness with the drift silenced, sigma = {sigma}\n");
    println!(
        "{:>6}  {:>14}  {:>14}  {:>10}",
        "n", "standard", "closed form", "alternative"
    );

    let mut previous = None;
    for n in [25, 100, 400, 1600] {
        let standard = ModelParams::new(1.0, -1.0, sigma, kernel.clone())?;
        let paper = standard.clone().with_scaling(NoiseScaling::Paper);

        // Two paths suffice: the value is the same for every path.
        let std_val = estimate_unfairness(&standard, n, dead, 2, 0, Method::PriceLevel)?.value;
        let alt_val = estimate_unfairness(&paper, n, dead, 2, 0, Method::PriceLevel)?.value;

        let h = sigma / (n as f64).sqrt();
        let closed = n as f64 * (h.cosh() * (-sigma * sigma / (2.0 * n as f64)).exp() - 1.0).abs();
        println!("{n:>6}  {std_val:>14.9}  {closed:>14.9}  {alt_val:>10.6}");

        if let Some(last) = previous {
            let ratio: f64 = last / std_val;
            println!("{:>6}  standard floor shrank by {ratio:.3}x", "");
        }
        previous = Some(std_val);
    }

    println!(
        "\nstandard scaling: floor ~ sigma^4 / (12 n) = {:.9} at n = 1600",
        sigma.powi(4) / (12.0 * 1600.0)
    );
    println!(
        "alternative scaling: floor ~ sigma^2 / 4 = {:.6}, independent of n",
        sigma * sigma / 4.0
    );
    Ok(())
}
