//! The six ablation rows on the synthetic benchmark, from raw-embedding MD
//! up to the full method.
//!
//!     cargo run --release --example ablation -- [seed]

use maple::benchmark::{self, Benchmark, BenchmarkLayout};
use maple::config::{AblationRow, RunConfig};
use maple::pipeline::{ablate, ablation_table, OodSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let bench = Benchmark::generate(BenchmarkLayout::default(), seed)?;
    let base = RunConfig {
        train: benchmark::train_config(seed),
        ..RunConfig::default()
    };
    let ood = [OodSet {
        name: "far".into(),
        features: bench.ood_features().clone(),
    }];
    let rows = ablate(&bench.data, &bench.split, &bench.test(), &ood, &base, &AblationRow::ALL);
    print!("{}", ablation_table(&rows));
    for r in &rows {
        if let Some(rep) = &r.report {
            println!("row {} qq error {:.3}", r.row, rep.qq_error);
        }
    }
    Ok(())
}
