//! Goodness-of-fit diagnostic for the event simulator: integrating the
//! conditional intensity between consecutive events of a component
//! (time rescaling) turns its event times into unit-rate exponential
//! waiting times, which a Kolmogorov-Smirnov test can check.
//!
//! ```bash
//! cargo run --example time_rescaling
//! ```

use hawkes_diffusion::bench::benchmark_hawkes_params;
use hawkes_diffusion::hawkes::{compensator_at, simulate, time_rescaling_residuals};
use hawkes_diffusion::stats::{exp1_ks_test, mean};

fn main() -> hawkes_diffusion::Result<()> {
    let params = benchmark_hawkes_params();
    let horizon = 1000.0;
    let log = simulate(&params, horizon, 9)?;
    println!(
        "simulated {} events on [0, {horizon}]: {:?} per component",
        log.total_count(),
        log.counts()
    );

    // The compensator at the horizon should sit near the realized counts:
    // counting process minus compensator is a martingale.
    let total = compensator_at(&params, &log, params.baseline(), horizon)?;
    for (j, count) in log.counts().iter().enumerate() {
        println!(
            "component {j}: {} events vs compensator {:.1} at the horizon",
            count, total[j]
        );
    }

    let residuals = time_rescaling_residuals(&params, &log, params.baseline())?;
    println!("\ntime-rescaled waiting times should be Exp(1):");
    for (j, r) in residuals.iter().enumerate() {
        let (d, p) = exp1_ks_test(r);
        println!(
            "component {j}: {} residuals, mean {:.4} (target 1), KS D = {d:.4}, p = {p:.3}",
            r.len(),
            mean(r)
        );
    }
    Ok(())
}
