//! Simulate the two-component mutually exciting event process and compare
//! the realized event rates with the stationarity oracle.
//!
//! ```bash
//! cargo run --example hawkes_events
//! ```

use hawkes_diffusion::bench::benchmark_hawkes_params;
use hawkes_diffusion::hawkes::{intensity_at, simulate};

fn main() -> hawkes_diffusion::Result<()> {
    let params = benchmark_hawkes_params();
    println!(
        "branching spectral radius: {:.4} (subcritical, so a stationary regime exists)",
        params.spectral_radius()
    );

    let horizon = 200.0;
    let log = simulate(&params, horizon, 7)?;
    println!(
        "simulated {} events on [0, {horizon}]: {:?} per component",
        log.total_count(),
        log.counts()
    );

    let expected = params.expected_rate()?;
    for (j, rate) in expected.iter().enumerate() {
        let observed = log.counts()[j] as f64 / horizon;
        println!("component {j}: observed rate {observed:.4}, stationary oracle {rate:.4}");
    }

    println!("\nconditional intensity right after the first few events:");
    for &(t, j) in log.merged().iter().take(5) {
        let state = intensity_at(&params, &log, params.baseline(), t + 1e-9)?;
        println!(
            "  t = {t:.4} (component {j} fired): lambda = [{:.4}, {:.4}]",
            state.intensities()[0],
            state.intensities()[1]
        );
    }

    println!("\nfirst CSV lines of the event record:");
    for line in log.to_csv().lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
