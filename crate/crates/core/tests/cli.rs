use std::path::Path;
use std::process::{Command, Output};

use maple::metrics::EvalReport;

const SPEC: &str = r#"{
  "seed": 5,
  "classes": [
    {"name": "a", "modes": [{"mean": [0, 0, 0], "std": 0.3, "count": 50},
                            {"mean": [6, 6, 0], "std": 0.3, "count": 50}]},
    {"name": "b", "modes": [{"mean": [6, 0, 0], "std": 0.3, "count": 60}]},
    {"name": "c", "modes": [{"mean": [0, 6, 0], "std": 0.3, "count": 60}]}
  ]
}"#;

const OOD_SPEC: &str = r#"{
  "seed": 6,
  "classes": [{"name": "far", "modes": [{"mean": [20, 20, 20], "std": 0.3, "count": 40}]}]
}"#;

fn maple(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maple"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Setup {
    dir: tempfile::TempDir,
}

impl Setup {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("spec.json"), SPEC).unwrap();
        std::fs::write(dir.path().join("ood.json"), OOD_SPEC).unwrap();
        let setup = Setup { dir };
        ok(&maple(&["gen", "--spec", s(&setup.p("spec.json")), "--output", s(&setup.p("data.txt"))]));
        ok(&maple(&["gen", "--spec", s(&setup.p("ood.json")), "--output", s(&setup.p("ood.bin"))]));
        let conf = format!(
            "train_data = {}\nood_data = {}\nmax_epochs = 6\np = 2\nbatch_size = 32\nlearning_rate = 0.02\n",
            s(&setup.p("data.txt")),
            s(&setup.p("ood.bin"))
        );
        std::fs::write(setup.p("run.conf"), conf).unwrap();
        setup
    }

    fn p(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn train_then_eval() {
    let st = Setup::new();
    let conf = st.p("run.conf");
    let model = st.p("model");
    ok(&maple(&["train", "--config", s(&conf), "--out", s(&model), "--seed", "3"]));
    for f in ["model.ckpt", "pca.bin", "head.bin", "train_log.jsonl"] {
        assert!(model.join(f).exists(), "{f} missing");
    }
    let eval_dir = st.p("eval");
    let out = maple(&["eval", "--config", s(&conf), "--model", s(&model), "--out", s(&eval_dir)]);
    ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("auroc="), "{stdout}");
    let report = EvalReport::from_json(&std::fs::read_to_string(eval_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.ood.len(), 1);
    assert!(report.accuracy_md > 0.9);
    assert!(eval_dir.join("calibration.csv").exists());
    assert!(eval_dir.join(format!("pr_{}.csv", report.ood[0].name)).exists());
}

#[test]
fn ablate_and_sweep_write_tables() {
    let st = Setup::new();
    let conf = st.p("run.conf");
    let out = st.p("ablate");
    ok(&maple(&["ablate", "--config", s(&conf), "--out", s(&out)]));
    let table = std::fs::read_to_string(out.join("ablation.tsv")).unwrap();
    assert_eq!(table.lines().count(), 7, "{table}");
    for row in 1..=6 {
        assert!(out.join(format!("row{row}")).join("report.json").exists());
    }
    let out = st.p("sweep");
    ok(&maple(&["sweep", "--config", s(&conf), "--out", s(&out), "--param", "t", "--values", "0,1"]));
    let table = std::fs::read_to_string(out.join("sweep_fnr_threshold.tsv")).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
}

#[test]
fn set_overrides_config_file() {
    let st = Setup::new();
    let out = st.p("m");
    ok(&maple(&[
        "train",
        "--config",
        s(&st.p("run.conf")),
        "--set",
        "max_epochs=3",
        "--out",
        s(&out),
    ]));
    let log = std::fs::read_to_string(out.join("train_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 3);
}

#[test]
fn benchmark_gen_writes_a_runnable_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(&maple(&["gen", "--benchmark", "--out", s(dir.path()), "--seed", "1"]));
    let conf = std::fs::read_to_string(dir.path().join("benchmark.conf")).unwrap();
    assert!(conf.contains("benchmark_id.bin") && conf.contains("benchmark_ood.bin"));
    assert!(dir.path().join("benchmark_id.bin").exists());
}

#[test]
fn exit_codes() {
    let st = Setup::new();
    let conf = st.p("run.conf");
    assert_eq!(maple(&["train", "--config", s(&conf), "--set", "bogus=1"]).status.code(), Some(1));
    assert_eq!(maple(&["train", "--config", s(&conf), "--set", "no_equals_sign"]).status.code(), Some(1));
    assert_eq!(maple(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(maple(&["train", "--config", s(&st.p("missing.conf"))]).status.code(), Some(2));
    assert_eq!(
        maple(&["train", "--set", &format!("train_data={}", s(&st.p("nope.txt"))), "--out", s(&st.p("x"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(maple(&["train", "--config", s(&conf), "--set", "learning_rate=-1"]).status.code(), Some(1));
    assert_eq!(maple(&["--help"]).status.code(), Some(0));
}
