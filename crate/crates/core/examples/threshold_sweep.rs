//! Sweeps the false-negative-ratio trigger `t` on the benchmark: low values
//! split classes that are merely hard, high values never split.
//!
//!     cargo run --release --example threshold_sweep

use maple::benchmark::{self, Benchmark, BenchmarkLayout};
use maple::config::RunConfig;
use maple::pipeline::{sweep, sweep_table, OodSet, SweepParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bench = Benchmark::generate(BenchmarkLayout::default(), 0)?;
    let base = RunConfig {
        train: benchmark::train_config(0),
        ..RunConfig::default()
    };
    let ood = [OodSet {
        name: "far".into(),
        features: bench.ood_features().clone(),
    }];
    let values: Vec<String> = ["0", "0.1", "0.3", "0.5", "1"].iter().map(|s| s.to_string()).collect();
    let points = sweep(
        &bench.data,
        &bench.split,
        &bench.test(),
        &ood,
        &base,
        SweepParam::Threshold,
        &values,
    )?;
    print!("{}", sweep_table(SweepParam::Threshold, &points));
    Ok(())
}
