use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maple::config::RunConfig;
use maple::metrics::EvalReport;
use maple::pipeline::{self, SweepParam};
use maple::{Error, Result};

#[derive(Parser)]
#[command(name = "maple", version, about = "Mahalanobis-distance uncertainty with latent relabelling")]
struct Cli {
    /// key = value config file; later flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a JSON mixture spec, or the built-in benchmark.
    Gen {
        /// JSON mixture spec.
        #[arg(long, conflicts_with = "benchmark", required_unless_present = "benchmark")]
        spec: Option<PathBuf>,
        /// Dataset file to write (`.bin` for binary, otherwise text).
        #[arg(long, requires = "spec")]
        output: Option<PathBuf>,
        /// Write the synthetic benchmark and its config into `--out`.
        #[arg(long)]
        benchmark: bool,
    },
    /// Train and persist model, PCA and distance head.
    Train,
    /// Evaluate saved artifacts on test and OOD data.
    Eval {
        /// Directory holding the trained artifacts; defaults to `--out`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the six ablation rows.
    Ablate,
    /// One full run per value of a relabelling hyperparameter.
    Sweep {
        /// `t`, `p` or `max_clusters`.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text)?;
    }
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(r: &EvalReport) {
    println!(
        "K={} d'={} acc_softmax={:.4} acc_md={:.4} ece={:.4} nll={:.4} qq={:.4} latency={:.4}ms",
        r.num_pseudo_classes,
        r.num_eigen,
        r.accuracy_softmax,
        r.accuracy_md,
        r.ece,
        r.nll,
        r.qq_error,
        r.latency_ms_per_sample
    );
    for o in &r.ood {
        println!("  ood {}: auroc={:.4} aupr={:.4}", o.name, o.auroc, o.aupr);
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli)?;
    match &cli.command {
        Command::Gen { benchmark: true, .. } => {
            let b = pipeline::cmd_gen_benchmark(&cfg.out_dir, cfg.train.seed)?;
            println!(
                "wrote {} ID and {} OOD samples to {}; train with --config {}",
                b.data.len(),
                b.ood.len(),
                cfg.out_dir.display(),
                cfg.out_dir.join(pipeline::BENCHMARK_CONFIG).display()
            );
        }
        Command::Gen { spec, output, .. } => {
            let spec = spec.as_ref().expect("clap enforces --spec");
            let output = output
                .clone()
                .ok_or_else(|| Error::Config("gen --spec needs --output".into()))?;
            let ds = pipeline::cmd_gen(spec, &output)?;
            println!("wrote {} samples of {} classes to {}", ds.len(), ds.num_classes(), output.display());
        }
        Command::Train => {
            let art = pipeline::cmd_train(&cfg)?;
            let last = art.log.last();
            println!(
                "trained {} epochs, K={}, refinements={}, final val_acc={:.4}; artifacts in {}",
                art.log.len(),
                art.state.num_pseudo(),
                art.state.history.len(),
                last.map_or(f64::NAN, |r| r.val_acc),
                cfg.out_dir.display()
            );
        }
        Command::Eval { model } => {
            let dir = model.clone().unwrap_or_else(|| cfg.out_dir.clone());
            print_report(&pipeline::cmd_eval(&cfg, &dir)?);
        }
        Command::Ablate => {
            let rows = pipeline::cmd_ablate(&cfg)?;
            print!("{}", pipeline::ablation_table(&rows));
        }
        Command::Sweep { param, values } => {
            let points = pipeline::cmd_sweep(&cfg, *param, values)?;
            print!("{}", pipeline::sweep_table(*param, &points));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
