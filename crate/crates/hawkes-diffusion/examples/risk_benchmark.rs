//! Monte-Carlo risk study at desk scale: a few cells of the benchmark
//! grid with a reduced replicate count, printed as the standard result
//! table. The full 16-cell study is available through the `bench`
//! subcommand of the command-line tool.
//!
//! ```bash
//! cargo run --release --example risk_benchmark
//! ```

use hawkes_diffusion::bench::{benchmark_hawkes_params, run_table, ExperimentConfig};

fn main() -> hawkes_diffusion::Result<()> {
    let cells: Vec<ExperimentConfig> = [("model1", 1000), ("model1", 10_000), ("model3", 1000)]
        .into_iter()
        .map(|(model, n)| ExperimentConfig {
            model: model.to_string(),
            hawkes: benchmark_hawkes_params(),
            n,
            delta: 0.1,
            replicates: 50,
            rho: 3.0,
            lower: -1.0,
            upper: 1.0,
            base_seed: 1,
            m_max: 20,
            substeps: 5,
            x0: 0.0,
            explosion_bound: 1e6,
        })
        .collect();

    println!("running {} cells at 50 replicates each...", cells.len());
    let table = run_table(&cells)?;
    print!("{}", table.to_csv());

    println!("\ntenfold more observations should cut the risk:");
    let small = table.cells[0].result.mean_risk;
    let large = table.cells[1].result.mean_risk;
    println!("  model1 risk: {small:.4} at n=1000 -> {large:.4} at n=10000");
    Ok(())
}
