//! Simulate the jump diffusion on an observation grid: between events the
//! state follows the drift and Brownian terms under a refined Euler
//! scheme, and every event of the driving process kicks the state by the
//! jump coefficient.
//!
//! ```bash
//! cargo run --example jump_diffusion_path
//! ```

use hawkes_diffusion::bench::benchmark_hawkes_params;
use hawkes_diffusion::sde::{model_by_name, simulate_path, SimConfig};

fn main() -> hawkes_diffusion::Result<()> {
    let model = model_by_name("model1")?;
    let params = benchmark_hawkes_params();
    let config = SimConfig {
        n: 200,
        delta: 0.1,
        substeps: 5,
        x0: 0.0,
        seed: 11,
        explosion_bound: 1e6,
    };

    let (path, events) = simulate_path(&model, &params, &config)?;
    println!(
        "simulated {} observations with step {} (horizon {}), driven by {} events",
        path.steps(),
        path.delta(),
        path.horizon(),
        events.total_count()
    );

    println!("\nfirst observations (k, t, x):");
    for line in path.to_csv().lines().skip(1).take(6) {
        println!("  {line}");
    }

    // Observation steps that contain at least one driving event: the state
    // change there mixes diffusion with the jump a(X) per event.
    let merged = events.merged();
    println!("\nobservation steps containing driving events (first 5):");
    let mut shown = 0;
    for k in 0..path.steps() {
        let (lo, hi) = (k as f64 * path.delta(), (k + 1) as f64 * path.delta());
        let count = merged.iter().filter(|(t, _)| *t > lo && *t <= hi).count();
        if count > 0 {
            let x = path.values()[k];
            let dx = path.values()[k + 1] - x;
            println!("  step {k}: {count} event(s), X = {x:.4}, increment {dx:+.4}");
            shown += 1;
            if shown == 5 {
                break;
            }
        }
    }

    let terminal = path.values().last().unwrap();
    println!("\nterminal state X_T = {terminal:.4}");
    Ok(())
}
