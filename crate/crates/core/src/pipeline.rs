//! End-to-end orchestration: training, fitting the distance head,
//! evaluation, ablation and sweeps. The `cmd_*` functions wrap the
//! in-memory runs with file I/O and back the command-line tool.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmark::{self, Benchmark, BenchmarkLayout};
use crate::config::{AblationRow, RunConfig};
use crate::dataio::{self, generate_mixture, stratified_split, DatasetSplit, LabeledDataset, MixtureSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mahal::{fit_pca_with, predict, DistanceMode, GaussianHead, PcaConfig, PcaTransform, Prediction};
use crate::metrics::{self, EvalReport, OodReport, ORIENTATION};
use crate::nn::MlpClassifier;
use crate::relabel::{train_maple, EpochRecord, RelabelState};

pub const MODEL_FILE: &str = "model.ckpt";
pub const PCA_FILE: &str = "pca.bin";
pub const HEAD_FILE: &str = "head.bin";
pub const LOG_FILE: &str = "train_log.jsonl";
pub const CONFIG_ECHO: &str = "config.resolved";
pub const REPORT_FILE: &str = "report.json";

/// Worker cap from `MAPLE_THREADS`, defaulting to the machine's cores.
pub fn worker_threads() -> usize {
    std::env::var("MAPLE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `jobs` on at most `threads` workers; results keep job order.
pub fn run_parallel<T, F>(jobs: Vec<F>, threads: usize) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let threads = threads.max(1).min(jobs.len().max(1));
    if threads == 1 {
        return jobs.into_iter().map(|j| j()).collect();
    }
    let n = jobs.len();
    let queue = std::sync::Mutex::new(jobs.into_iter().enumerate().collect::<Vec<_>>());
    let results = std::sync::Mutex::new((0..n).map(|_| None).collect::<Vec<Option<T>>>());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop();
                let Some((i, f)) = job else { break };
                let out = f();
                results.lock().expect("results lock")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Named OOD feature matrix.
#[derive(Debug, Clone)]
pub struct OodSet {
    pub name: String,
    pub features: Matrix,
}

/// A trained network plus everything needed to predict with it.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub model: MlpClassifier,
    pub state: RelabelState,
    pub pca: PcaTransform,
    pub head: GaussianHead,
    pub log: Vec<EpochRecord>,
}

/// PCA (or the identity when disabled) and the Gaussian head, both fitted on
/// the final training embeddings under the final pseudo-labels.
pub fn fit_uncertainty(
    model: &MlpClassifier,
    state: &RelabelState,
    x_train: &Matrix,
    cfg: &RunConfig,
) -> Result<(PcaTransform, GaussianHead)> {
    let emb = model.embed(x_train)?;
    let pca = if cfg.use_pca {
        fit_pca_with(
            &emb,
            PcaConfig {
                variance_target: cfg.pca_variance_target,
                standardize: cfg.standardize,
            },
        )?
    } else {
        PcaTransform::identity(emb.cols())
    };
    let z = pca.transform_batch(&emb)?;
    let head = GaussianHead::fit(&z, &state.pseudo_labels, state.label_map.clone())?;
    Ok((pca, head))
}

pub fn train(ds: &LabeledDataset, split: &DatasetSplit, cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let out = train_maple(ds, split, &cfg.effective_train())?;
    let x_train = ds.features().select_rows(&split.train);
    let (pca, head) = fit_uncertainty(&out.model, &out.state, &x_train, cfg)?;
    Ok(Artifacts {
        model: out.model,
        state: out.state,
        pca,
        head,
        log: out.log,
    })
}

impl Artifacts {
    pub fn predict_batch(&self, x: &Matrix, mode: DistanceMode) -> Result<Vec<Prediction>> {
        let (emb, logits) = self.model.forward_batch(x)?;
        (0..x.rows())
            .map(|i| Ok(predict(&self.pca, &self.head, emb.row(i), Some(logits.row(i)), mode)?))
            .collect()
    }

    pub fn log_jsonl(&self) -> String {
        let mut s = String::new();
        for rec in &self.log {
            s.push_str(&serde_json::to_string(rec).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    /// Model checkpoint with the relabel state appended, PCA, head and log.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))
        };
        write(MODEL_FILE, &|w| {
            self.model.write_checkpoint(&mut *w)?;
            self.state.write(&mut *w)
        })?;
        write(PCA_FILE, &|w| self.pca.write(&mut *w))?;
        write(HEAD_FILE, &|w| self.head.write(&mut *w))?;
        write(LOG_FILE, &|w| w.write_all(self.log_jsonl().as_bytes()))?;
        Ok(())
    }

    /// Reads what [`Artifacts::save`] wrote; the log is reloaded when present.
    pub fn load(dir: &Path) -> Result<Self> {
        let open = |name: &str| -> Result<BufReader<File>> {
            let path = dir.join(name);
            File::open(&path).map(BufReader::new).map_err(|e| Error::io(&path, e))
        };
        let mut r = open(MODEL_FILE)?;
        let model = MlpClassifier::read_checkpoint(&mut r)?;
        let state = RelabelState::read(&mut r)?;
        let pca = PcaTransform::read(open(PCA_FILE)?)?;
        let head = GaussianHead::read(open(HEAD_FILE)?)?;
        if state.num_pseudo() != model.num_classes() || head.num_classes() != model.num_classes() {
            return Err(Error::Config(format!(
                "artifact mismatch: model has {} classes, state {}, head {}",
                model.num_classes(),
                state.num_pseudo(),
                head.num_classes()
            )));
        }
        let log = match std::fs::read_to_string(dir.join(LOG_FILE)) {
            Ok(text) => text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| serde_json::from_str(l).map_err(|e| Error::Config(format!("bad log line: {e}"))))
                .collect::<Result<Vec<_>>>()?,
            Err(_) => Vec::new(),
        };
        Ok(Artifacts {
            model,
            state,
            pca,
            head,
            log,
        })
    }
}

/// Per-sample evaluation outputs alongside the report.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub id_predictions: Vec<Prediction>,
    pub ood_predictions: Vec<Vec<Prediction>>,
}

impl Evaluation {
    /// Squared distance to the predicted class for every ID test sample.
    pub fn id_md_squared(&self) -> Vec<f64> {
        self.id_predictions.iter().map(|p| p.min_distance().powi(2)).collect()
    }
}

pub fn evaluate(art: &Artifacts, test: &LabeledDataset, ood: &[OodSet], cfg: &RunConfig) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(crate::error::MetricsError::EmptyInput.into());
    }
    let mode = cfg.distance_mode;
    let x = test.features();

    let start = Instant::now();
    let mut id_predictions = Vec::with_capacity(test.len());
    for i in 0..x.rows() {
        let (emb, logits) = art.model.forward(x.row(i))?;
        id_predictions.push(predict(&art.pca, &art.head, &emb, Some(&logits), mode)?);
    }
    let latency_ms_per_sample = start.elapsed().as_secs_f64() * 1e3 / x.rows() as f64;

    let labels = test.labels();
    let md_pred: Vec<usize> = id_predictions.iter().map(|p| p.original_class).collect();
    let sm_pred: Vec<usize> = id_predictions
        .iter()
        .map(|p| p.softmax_class.expect("logits supplied"))
        .collect();
    let confidences: Vec<f64> = id_predictions.iter().map(|p| p.p_md).collect();
    let correct: Vec<bool> = md_pred.iter().zip(labels).map(|(p, l)| p == l).collect();
    let id_unc: Vec<f64> = id_predictions.iter().map(|p| p.uncertainty).collect();
    let md2: Vec<f64> = id_predictions.iter().map(|p| p.min_distance().powi(2)).collect();
    let qq_error = if md2.len() >= 10 {
        metrics::qq_error(&md2, art.head.dof())?
    } else {
        f64::NAN
    };

    let mut ood_reports = Vec::with_capacity(ood.len());
    let mut ood_predictions = Vec::with_capacity(ood.len());
    for set in ood {
        let preds = art.predict_batch(&set.features, mode)?;
        let unc: Vec<f64> = preds.iter().map(|p| p.uncertainty).collect();
        ood_reports.push(OodReport {
            name: set.name.clone(),
            samples: unc.len(),
            auroc: metrics::auroc(&id_unc, &unc)?,
            aupr: metrics::aupr(&id_unc, &unc)?,
            uncertainty_histogram: metrics::uncertainty_histogram(&unc, cfg.histogram_bins)?,
            pr_curve: metrics::pr_curve(&id_unc, &unc)?,
        });
        ood_predictions.push(preds);
    }

    let report = EvalReport {
        orientation: ORIENTATION.into(),
        test_samples: test.len(),
        num_pseudo_classes: art.head.num_classes(),
        num_eigen: art.pca.output_dim(),
        distance_mode: mode.to_string(),
        accuracy_softmax: metrics::accuracy(&sm_pred, labels)?,
        accuracy_md: metrics::accuracy(&md_pred, labels)?,
        ece: metrics::ece(&confidences, &correct, cfg.ece_bins)?,
        nll: metrics::nll(&confidences)?,
        qq_error,
        calibration_bins: metrics::calibration_curve(&confidences, &correct, cfg.ece_bins)?,
        id_uncertainty_histogram: metrics::uncertainty_histogram(&id_unc, cfg.histogram_bins)?,
        ood: ood_reports,
        latency_ms_per_sample,
    };
    Ok(Evaluation {
        report,
        id_predictions,
        ood_predictions,
    })
}

/// Writes the report and its curve tables into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    put(REPORT_FILE.into(), report.to_json())?;
    put("calibration.csv".into(), report.calibration_csv())?;
    put("histograms.csv".into(), report.histogram_csv())?;
    for o in &report.ood {
        put(format!("pr_{}.csv", o.name), EvalReport::pr_csv(o))?;
    }
    Ok(())
}

fn require(path: &Option<PathBuf>, key: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::Config(format!("{key} is not set")))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ood".into())
}

/// Training data and its split, deterministic in the config seed.
pub fn load_training(cfg: &RunConfig) -> Result<(LabeledDataset, DatasetSplit)> {
    let ds = dataio::load_dataset(&require(&cfg.train_data, "train_data")?)?;
    let split = stratified_split(&ds, cfg.split, cfg.train.seed)?;
    Ok((ds, split))
}

pub fn load_ood(cfg: &RunConfig) -> Result<Vec<OodSet>> {
    cfg.ood_data
        .iter()
        .map(|p| {
            Ok(OodSet {
                name: dataset_name(p),
                features: dataio::load_dataset(p)?.features().clone(),
            })
        })
        .collect()
}

pub fn load_test(cfg: &RunConfig) -> Result<LabeledDataset> {
    match &cfg.test_data {
        Some(p) => Ok(dataio::load_dataset(p)?),
        None => {
            let (ds, split) = load_training(cfg)?;
            Ok(ds.subset(&split.test))
        }
    }
}

fn echo_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(CONFIG_ECHO);
    std::fs::write(&path, cfg.to_text()).map_err(|e| Error::io(&path, e))
}

/// Generates a dataset from a JSON mixture spec.
pub fn cmd_gen(spec_path: &Path, out: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let spec = MixtureSpec::from_json(&text)?;
    let ds = generate_mixture(&spec)?;
    dataio::save_dataset(&ds, out)?;
    Ok(ds)
}

pub const BENCHMARK_DATA: &str = "benchmark_id.bin";
pub const BENCHMARK_OOD: &str = "benchmark_ood.bin";
pub const BENCHMARK_CONFIG: &str = "benchmark.conf";

/// Writes the synthetic benchmark into `dir`: ID data, OOD data and a
/// config file pointing at both with the benchmark's training settings.
pub fn cmd_gen_benchmark(dir: &Path, seed: u64) -> Result<Benchmark> {
    let bench = Benchmark::generate(BenchmarkLayout::default(), seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (id, ood) = (dir.join(BENCHMARK_DATA), dir.join(BENCHMARK_OOD));
    dataio::save_dataset(&bench.data, &id)?;
    dataio::save_dataset(&bench.ood, &ood)?;
    let mut cfg = RunConfig {
        train: benchmark::train_config(seed),
        train_data: Some(id),
        ood_data: vec![ood],
        ..RunConfig::default()
    };
    cfg.split = bench.layout.split;
    let path = dir.join(BENCHMARK_CONFIG);
    std::fs::write(&path, cfg.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(bench)
}

/// Trains on `train_data` and persists the artifacts into `out_dir`.
pub fn cmd_train(cfg: &RunConfig) -> Result<Artifacts> {
    let (ds, split) = load_training(cfg)?;
    let art = train(&ds, &split, cfg)?;
    art.save(&cfg.out_dir)?;
    echo_config(cfg, &cfg.out_dir)?;
    Ok(art)
}

/// Evaluates the artifacts in `model_dir`; reports go to `out_dir`.
pub fn cmd_eval(cfg: &RunConfig, model_dir: &Path) -> Result<EvalReport> {
    let art = Artifacts::load(model_dir)?;
    let test = load_test(cfg)?;
    let ood = load_ood(cfg)?;
    let eval = evaluate(&art, &test, &ood, cfg)?;
    write_report(&eval.report, &cfg.out_dir)?;
    echo_config(cfg, &cfg.out_dir)?;
    Ok(eval.report)
}

/// One ablation row's outcome; a failed row keeps its error message.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowResult {
    pub row: usize,
    pub name: String,
    pub report: Option<EvalReport>,
    pub k_history: Vec<usize>,
    pub error: Option<String>,
}

impl RowResult {
    pub fn mean_auroc(&self) -> Option<f64> {
        let r = self.report.as_ref()?;
        (!r.ood.is_empty()).then(|| mean(r.ood.iter().map(|o| o.auroc)))
    }
}

/// NaN for an empty sequence, i.e. when no OOD set was given.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Trains once per distinct training-flag combination, then fits and
/// evaluates every requested row.
pub fn ablate(
    ds: &LabeledDataset,
    split: &DatasetSplit,
    test: &LabeledDataset,
    ood: &[OodSet],
    base: &RunConfig,
    rows: &[AblationRow],
) -> Vec<RowResult> {
    let mut groups: Vec<Vec<AblationRow>> = Vec::new();
    for &row in rows {
        match groups.iter_mut().find(|g| g[0].shares_training_with(row)) {
            Some(g) => g.push(row),
            None => groups.push(vec![row]),
        }
    }
    let jobs: Vec<_> = groups
        .into_iter()
        .map(|group| {
            move || -> Vec<RowResult> {
                let cfg0 = group[0].apply(base);
                let trained = train_maple(ds, split, &cfg0.effective_train());
                group
                    .iter()
                    .map(|&row| {
                        let cfg = row.apply(base);
                        let outcome = trained.as_ref().map_err(|e| e.to_string()).and_then(|out| {
                            let x_train = ds.features().select_rows(&split.train);
                            let (pca, head) =
                                fit_uncertainty(&out.model, &out.state, &x_train, &cfg).map_err(|e| e.to_string())?;
                            let art = Artifacts {
                                model: out.model.clone(),
                                state: out.state.clone(),
                                pca,
                                head,
                                log: out.log.clone(),
                            };
                            let eval = evaluate(&art, test, ood, &cfg).map_err(|e| e.to_string())?;
                            Ok((eval.report, art.log.iter().map(|r| r.k).collect::<Vec<_>>()))
                        });
                        match outcome {
                            Ok((report, k_history)) => RowResult {
                                row: row.index(),
                                name: row.name().into(),
                                report: Some(report),
                                k_history,
                                error: None,
                            },
                            Err(e) => {
                                log::error!("ablation row {} failed: {e}", row.index());
                                RowResult {
                                    row: row.index(),
                                    name: row.name().into(),
                                    report: None,
                                    k_history: Vec::new(),
                                    error: Some(e),
                                }
                            }
                        }
                    })
                    .collect()
            }
        })
        .collect();
    let mut results: Vec<RowResult> = run_parallel(jobs, worker_threads()).into_iter().flatten().collect();
    results.sort_by_key(|r| r.row);
    results
}

pub fn ablation_table(rows: &[RowResult]) -> String {
    let mut s = String::from("row\tname\tacc_softmax\tacc_md\tece\tnll\tmean_auroc\tmean_aupr\tK\t#Eig\tstatus\n");
    for r in rows {
        match &r.report {
            Some(rep) => {
                let aupr = mean(rep.ood.iter().map(|o| o.aupr));
                s.push_str(&format!(
                    "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\tok\n",
                    r.row,
                    r.name,
                    rep.accuracy_softmax,
                    rep.accuracy_md,
                    rep.ece,
                    rep.nll,
                    r.mean_auroc().unwrap_or(f64::NAN),
                    aupr,
                    rep.num_pseudo_classes,
                    if r.row == 1 { "-".to_string() } else { rep.num_eigen.to_string() },
                ));
            }
            None => s.push_str(&format!(
                "{}\t{}\t-\t-\t-\t-\t-\t-\t-\t-\tfailed: {}\n",
                r.row,
                r.name,
                r.error.as_deref().unwrap_or("unknown")
            )),
        }
    }
    s
}

/// Runs all six ablation rows; per-row reports land in `out_dir/row<i>`.
pub fn cmd_ablate(cfg: &RunConfig) -> Result<Vec<RowResult>> {
    let (ds, split) = load_training(cfg)?;
    let test = load_test(cfg)?;
    let ood = load_ood(cfg)?;
    let rows = ablate(&ds, &split, &test, &ood, cfg, &AblationRow::ALL);
    for r in &rows {
        if let Some(rep) = &r.report {
            write_report(rep, &cfg.out_dir.join(format!("row{}", r.row)))?;
        }
    }
    echo_config(cfg, &cfg.out_dir)?;
    let path = cfg.out_dir.join("ablation.tsv");
    std::fs::write(&path, ablation_table(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// Hyperparameters `cmd_sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    Threshold,
    Period,
    MaxClusters,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "fnr_threshold" => Ok(SweepParam::Threshold),
            "p" | "validation_period" => Ok(SweepParam::Period),
            "max_clusters" => Ok(SweepParam::MaxClusters),
            _ => Err(Error::Config(format!("cannot sweep {s:?}; use t, p or max_clusters"))),
        }
    }
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::Threshold => "fnr_threshold",
            SweepParam::Period => "validation_period",
            SweepParam::MaxClusters => "max_clusters",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub num_classes: usize,
    pub accuracy: f64,
    pub ece: f64,
    pub auroc: f64,
    pub k_history: Vec<usize>,
}

pub fn sweep(
    ds: &LabeledDataset,
    split: &DatasetSplit,
    test: &LabeledDataset,
    ood: &[OodSet],
    base: &RunConfig,
    param: SweepParam,
    values: &[String],
) -> Result<Vec<SweepPoint>> {
    let cfgs = values
        .iter()
        .map(|v| {
            let mut cfg = base.clone();
            cfg.set(param.key(), v)?;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<_> = cfgs
        .into_iter()
        .zip(values)
        .map(|(cfg, value)| {
            move || -> Result<SweepPoint> {
                let art = train(ds, split, &cfg)?;
                let rep = evaluate(&art, test, ood, &cfg)?.report;
                Ok(SweepPoint {
                    value: value.clone(),
                    num_classes: rep.num_pseudo_classes,
                    accuracy: rep.accuracy_md,
                    ece: rep.ece,
                    auroc: mean(rep.ood.iter().map(|o| o.auroc)),
                    k_history: art.log.iter().map(|r| r.k).collect(),
                })
            }
        })
        .collect();
    run_parallel(jobs, worker_threads()).into_iter().collect()
}

pub fn sweep_table(param: SweepParam, points: &[SweepPoint]) -> String {
    let mut s = format!("{}\t#Classes\taccuracy\tece\tauroc\n", param.key());
    for p in points {
        s.push_str(&format!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\n",
            p.value, p.num_classes, p.accuracy, p.ece, p.auroc
        ));
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig, param: SweepParam, values: &[String]) -> Result<Vec<SweepPoint>> {
    let (ds, split) = load_training(cfg)?;
    let test = load_test(cfg)?;
    let ood = load_ood(cfg)?;
    let points = sweep(&ds, &split, &test, &ood, cfg, param, values)?;
    echo_config(cfg, &cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("sweep_{}.tsv", param.key()));
    std::fs::write(&path, sweep_table(param, &points)).map_err(|e| Error::io(&path, e))?;
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_keeps_order() {
        let jobs: Vec<_> = (0..10).map(|i| move || i * i).collect();
        assert_eq!(run_parallel(jobs, 4), (0..10).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn sweep_param_names() {
        assert_eq!("t".parse::<SweepParam>().unwrap(), SweepParam::Threshold);
        assert_eq!("max_clusters".parse::<SweepParam>().unwrap(), SweepParam::MaxClusters);
        assert!("lr".parse::<SweepParam>().is_err());
    }
}
