//! Estimate the drift of a simulated jump diffusion by penalized
//! least-squares projection on nested trigonometric spaces, and compare
//! the selected estimate with the true coefficient.
//!
//! ```bash
//! cargo run --example drift_estimation
//! ```

use hawkes_diffusion::basis::CosineBasis;
use hawkes_diffusion::bench::benchmark_hawkes_params;
use hawkes_diffusion::estimator::{build_samples, empirical_risk, select};
use hawkes_diffusion::sde::{model_by_name, simulate_path, SimConfig};

fn main() -> hawkes_diffusion::Result<()> {
    let model = model_by_name("model1")?;
    let params = benchmark_hawkes_params();
    let config = SimConfig {
        n: 5000,
        delta: 0.1,
        substeps: 5,
        x0: 0.0,
        seed: 4,
        explosion_bound: 1e6,
    };
    let (path, events) = simulate_path(&model, &params, &config)?;

    // Rescaled increments, corrected for the known jump contribution, keyed
    // to the left observation point.
    let basis = CosineBasis::new(-1.0, 1.0)?;
    let samples = build_samples(&path, &events, &model, &basis)?;
    let inside = samples.iter().filter(|s| s.in_a).count();
    println!(
        "built {} regression samples, {inside} inside the estimation interval [-1, 1]",
        samples.len()
    );

    let estimate = select(
        &samples,
        &basis,
        10,
        3.0,
        model.diffusion_bound(),
        config.n,
        config.delta,
    )?;

    println!("\n  m   dim    contrast     penalty    criterion");
    for row in estimate.table() {
        let marker = if row.m == estimate.m_hat() {
            "  <- selected"
        } else {
            ""
        };
        println!(
            "  {:<3} {:<5} {:>10.5} {:>11.5} {:>12.5}{marker}",
            row.m, row.dim, row.contrast, row.penalty, row.criterion
        );
    }

    let risk = empirical_risk(&estimate, |x| model.drift(x), &samples)?;
    println!("\nempirical squared distance to the true drift: {risk:.5}");

    println!("\n   x     estimate     truth");
    for i in 0..=8 {
        let x = -1.0 + 0.25 * i as f64;
        println!(
            "  {x:>5.2} {:>10.4} {:>9.4}",
            estimate.evaluate(x),
            model.drift(x)
        );
    }
    Ok(())
}
