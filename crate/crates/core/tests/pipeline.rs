use maple::benchmark::{self, Benchmark, BenchmarkLayout};
use maple::config::RunConfig;
use maple::dataio::{
    generate_mixture, load_dataset, save_dataset, stratified_split, MixtureClass, MixtureMode, MixtureSpec,
};
use maple::mahal::DistanceMode;
use maple::pipeline::{evaluate, train, write_report, Artifacts, OodSet, MODEL_FILE};

fn small_spec(seed: u64) -> MixtureSpec {
    let class = |name: &str, means: &[[f64; 4]]| MixtureClass {
        name: name.into(),
        modes: means
            .iter()
            .map(|m| MixtureMode {
                mean: m.to_vec(),
                std: 0.3,
                count: 60,
            })
            .collect(),
    };
    MixtureSpec {
        classes: vec![
            class("a", &[[0.0, 0.0, 0.0, 0.0], [6.0, 6.0, 0.0, 0.0]]),
            class("b", &[[6.0, 0.0, 0.0, 0.0]]),
            class("c", &[[0.0, 6.0, 0.0, 0.0]]),
        ],
        seed,
    }
}

fn small_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.apply_text("max_epochs = 8\np = 2\nbatch_size = 32\nlearning_rate = 0.02\n").unwrap();
    cfg
}

#[test]
fn dataset_files_round_trip() {
    let ds = generate_mixture(&small_spec(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("d.txt");
    let bin = dir.path().join("d.bin");
    save_dataset(&ds, &text).unwrap();
    save_dataset(&ds, &bin).unwrap();
    let t = load_dataset(&text).unwrap();
    assert_eq!(t.features(), ds.features());
    assert_eq!(t.labels(), ds.labels());
    assert_eq!(t.class_names(), ds.class_names());
    // The binary format stores f32.
    let b = load_dataset(&bin).unwrap();
    assert_eq!(b.labels(), ds.labels());
    for (x, y) in b.features().as_slice().iter().zip(ds.features().as_slice()) {
        assert_eq!(*x, *y as f32 as f64);
    }
}

#[test]
fn artifacts_reload_to_identical_predictions() {
    let ds = generate_mixture(&small_spec(2)).unwrap();
    let split = stratified_split(&ds, (0.7, 0.15, 0.15), 2).unwrap();
    let cfg = small_config();
    let art = train(&ds, &split, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    art.save(dir.path()).unwrap();
    let back = Artifacts::load(dir.path()).unwrap();
    assert_eq!(back.log, art.log);
    assert_eq!(back.state, art.state);
    let x = ds.features();
    for mode in [DistanceMode::Mahalanobis, DistanceMode::Euclidean] {
        assert_eq!(back.predict_batch(x, mode).unwrap(), art.predict_batch(x, mode).unwrap());
    }
    let test = ds.subset(&split.test);
    let a = evaluate(&art, &test, &[], &cfg).unwrap().report;
    let b = evaluate(&back, &test, &[], &cfg).unwrap().report;
    assert_eq!(a.without_latency(), b.without_latency());
    write_report(&a, dir.path()).unwrap();
    assert!(dir.path().join("calibration.csv").exists());
}

#[test]
fn corrupt_checkpoint_is_rejected() {
    let ds = generate_mixture(&small_spec(3)).unwrap();
    let split = stratified_split(&ds, (0.7, 0.15, 0.15), 3).unwrap();
    let art = train(&ds, &split, &small_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    art.save(dir.path()).unwrap();
    let model = dir.path().join(MODEL_FILE);
    let bytes = std::fs::read(&model).unwrap();
    std::fs::write(&model, &bytes[..bytes.len() / 2]).unwrap();
    assert!(Artifacts::load(dir.path()).is_err());
}

fn benchmark_run(cfg_text: &str) -> (Benchmark, Artifacts) {
    let b = Benchmark::generate(BenchmarkLayout::default(), 0).unwrap();
    let mut cfg = RunConfig {
        train: benchmark::train_config(0),
        ..RunConfig::default()
    };
    cfg.apply_text(cfg_text).unwrap();
    let art = train(&b.data, &b.split, &cfg).unwrap();
    (b, art)
}

#[test]
fn validation_accuracy_recovers_after_each_split() {
    let (_, art) = benchmark_run("");
    let period = 10;
    assert!(!art.state.history.is_empty());
    let k = art.state.num_pseudo();
    assert!((5..=7).contains(&k), "K = {k}");
    let acc = |epoch: usize| art.log[epoch - 1].val_acc;
    let last = art.log.len();
    for event in &art.state.history {
        let before = acc(event.epoch);
        let horizon = (event.epoch + 5 * period).min(last);
        let recovered = (event.epoch + 1..=horizon).any(|e| acc(e) >= before - 0.01);
        assert!(
            recovered || event.epoch == last,
            "split at epoch {} (val acc {before}) not recovered by epoch {horizon}",
            event.epoch
        );
    }
}

#[test]
fn threshold_one_never_splits() {
    let (b, art) = benchmark_run("t = 1.0");
    assert!(art.state.history.is_empty());
    assert_eq!(art.state.num_pseudo(), b.data.num_classes());
    assert!(art.log.iter().all(|r| r.k == 4));
}

#[test]
fn ood_far_from_data_scores_high_uncertainty() {
    let (b, art) = benchmark_run("");
    let cfg = RunConfig::default();
    let ood = [OodSet {
        name: "far".into(),
        features: b.ood_features().clone(),
    }];
    let eval = evaluate(&art, &b.test(), &ood, &cfg).unwrap();
    let id_mean = eval.id_predictions.iter().map(|p| p.uncertainty).sum::<f64>() / eval.id_predictions.len() as f64;
    let ood_min = eval.ood_predictions[0]
        .iter()
        .map(|p| p.uncertainty)
        .fold(f64::INFINITY, f64::min);
    assert!(ood_min > id_mean, "ood min {ood_min} id mean {id_mean}");
    assert!(eval.report.ood[0].auroc >= 0.98);
}
