//! Run configuration: a flat `key = value` text format with `#` comments.
//! Every key has a default, later assignments win, and [`RunConfig::to_text`]
//! echoes the fully resolved configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mahal::DistanceMode;
use crate::nn::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub pca_variance_target: f64,
    pub standardize: bool,
    pub ece_bins: usize,
    pub histogram_bins: usize,
    pub distance_mode: DistanceMode,
    pub use_pca: bool,
    pub use_triplet: bool,
    pub use_clustering: bool,
    pub split: (f64, f64, f64),
    pub train_data: Option<PathBuf>,
    /// Evaluated instead of the test partition of `train_data` when set.
    pub test_data: Option<PathBuf>,
    pub ood_data: Vec<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            pca_variance_target: 0.95,
            standardize: true,
            ece_bins: 15,
            histogram_bins: 20,
            distance_mode: DistanceMode::Mahalanobis,
            use_pca: true,
            use_triplet: true,
            use_clustering: true,
            split: (0.8, 0.1, 0.1),
            train_data: None,
            test_data: None,
            ood_data: Vec::new(),
            out_dir: PathBuf::from("maple-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key} expects a boolean, got {value:?}"))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "hidden_dims",
        "embedding_dim",
        "learning_rate",
        "momentum",
        "weight_decay",
        "batch_size",
        "max_epochs",
        "margin",
        "triplet_weight",
        "validation_period",
        "fnr_threshold",
        "max_clusters",
        "seed",
        "pca_variance_target",
        "standardize",
        "ece_bins",
        "histogram_bins",
        "distance_mode",
        "use_pca",
        "use_triplet",
        "use_clustering",
        "split",
        "train_data",
        "test_data",
        "ood_data",
        "out_dir",
    ];

    /// Assigns one key. `t`, `p` and `clustering` are accepted as aliases.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "hidden_dims" => self.train.hidden_dims = parse_list(key, v)?,
            "embedding_dim" => self.train.embedding_dim = parse(key, v)?,
            "learning_rate" => self.train.learning_rate = parse(key, v)?,
            "momentum" => self.train.momentum = parse(key, v)?,
            "weight_decay" => self.train.weight_decay = parse(key, v)?,
            "batch_size" => self.train.batch_size = parse(key, v)?,
            "max_epochs" => self.train.max_epochs = parse(key, v)?,
            "margin" => self.train.margin = parse(key, v)?,
            "triplet_weight" => self.train.triplet_weight = parse(key, v)?,
            "validation_period" | "p" => self.train.validation_period = parse(key, v)?,
            "fnr_threshold" | "t" => self.train.fnr_threshold = parse(key, v)?,
            "max_clusters" => self.train.max_clusters = parse(key, v)?,
            "seed" => self.train.seed = parse(key, v)?,
            "pca_variance_target" => self.pca_variance_target = parse(key, v)?,
            "standardize" => self.standardize = parse_bool(key, v)?,
            "ece_bins" => self.ece_bins = parse(key, v)?,
            "histogram_bins" => self.histogram_bins = parse(key, v)?,
            "distance_mode" => {
                self.distance_mode = v.parse().map_err(|_| {
                    Error::Config(format!("distance_mode must be mahalanobis or euclidean, got {v:?}"))
                })?
            }
            "use_pca" => self.use_pca = parse_bool(key, v)?,
            "use_triplet" => self.use_triplet = parse_bool(key, v)?,
            "use_clustering" | "clustering" => self.use_clustering = parse_bool(key, v)?,
            "split" => {
                let f: Vec<f64> = parse_list(key, v)?;
                if f.len() != 3 {
                    return Err(Error::Config(format!("split needs three fractions, got {v:?}")));
                }
                self.split = (f[0], f[1], f[2]);
            }
            "train_data" => self.train_data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "test_data" => self.test_data = (!v.is_empty()).then(|| PathBuf::from(v)),
            "ood_data" => self.ood_data = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect(),
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_train().validate()?;
        if !(self.pca_variance_target > 0.0 && self.pca_variance_target <= 1.0) {
            return Err(Error::Config("pca_variance_target must be in (0, 1]".into()));
        }
        if self.ece_bins == 0 || self.histogram_bins == 0 {
            return Err(Error::Config("bin counts must be positive".into()));
        }
        Ok(())
    }

    /// The training configuration with the ablation flags folded in.
    pub fn effective_train(&self) -> TrainConfig {
        let mut t = self.train.clone();
        t.clustering = self.use_clustering;
        if !self.use_triplet {
            t.triplet_weight = 0.0;
        }
        t
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut s = String::from("# resolved configuration\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("hidden_dims", join(&t.hidden_dims));
        kv("embedding_dim", t.embedding_dim.to_string());
        kv("learning_rate", t.learning_rate.to_string());
        kv("momentum", t.momentum.to_string());
        kv("weight_decay", t.weight_decay.to_string());
        kv("batch_size", t.batch_size.to_string());
        kv("max_epochs", t.max_epochs.to_string());
        kv("margin", t.margin.to_string());
        kv("triplet_weight", t.triplet_weight.to_string());
        kv("validation_period", t.validation_period.to_string());
        kv("fnr_threshold", t.fnr_threshold.to_string());
        kv("max_clusters", t.max_clusters.to_string());
        kv("seed", t.seed.to_string());
        kv("pca_variance_target", self.pca_variance_target.to_string());
        kv("standardize", self.standardize.to_string());
        kv("ece_bins", self.ece_bins.to_string());
        kv("histogram_bins", self.histogram_bins.to_string());
        kv("distance_mode", self.distance_mode.to_string());
        kv("use_pca", self.use_pca.to_string());
        kv("use_triplet", self.use_triplet.to_string());
        kv("use_clustering", self.use_clustering.to_string());
        kv("split", format!("{},{},{}", self.split.0, self.split.1, self.split.2));
        kv("train_data", path(&self.train_data));
        kv("test_data", path(&self.test_data));
        kv(
            "ood_data",
            self.ood_data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
        );
        kv("out_dir", self.out_dir.display().to_string());
        s
    }
}

/// The six flag combinations of the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationRow {
    RawMd = 1,
    PcaMd = 2,
    PcaEd = 3,
    TripletPcaMd = 4,
    ClusteringPcaMd = 5,
    Maple = 6,
}

impl AblationRow {
    pub const ALL: [AblationRow; 6] = [
        AblationRow::RawMd,
        AblationRow::PcaMd,
        AblationRow::PcaEd,
        AblationRow::TripletPcaMd,
        AblationRow::ClusteringPcaMd,
        AblationRow::Maple,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationRow::RawMd => "DNN+MD",
            AblationRow::PcaMd => "DNN+PCA+MD",
            AblationRow::PcaEd => "DNN+PCA+ED",
            AblationRow::TripletPcaMd => "DNN+Triplet+PCA+MD",
            AblationRow::ClusteringPcaMd => "DNN+Clustering+PCA+MD",
            AblationRow::Maple => "MAPLE",
        }
    }

    /// `(use_pca, use_triplet, use_clustering, distance)`.
    pub fn flags(self) -> (bool, bool, bool, DistanceMode) {
        use DistanceMode::*;
        match self {
            AblationRow::RawMd => (false, false, false, Mahalanobis),
            AblationRow::PcaMd => (true, false, false, Mahalanobis),
            AblationRow::PcaEd => (true, false, false, Euclidean),
            AblationRow::TripletPcaMd => (true, true, false, Mahalanobis),
            AblationRow::ClusteringPcaMd => (true, false, true, Mahalanobis),
            AblationRow::Maple => (true, true, true, Mahalanobis),
        }
    }

    pub fn apply(self, base: &RunConfig) -> RunConfig {
        let (use_pca, use_triplet, use_clustering, distance_mode) = self.flags();
        RunConfig {
            use_pca,
            use_triplet,
            use_clustering,
            distance_mode,
            ..base.clone()
        }
    }

    /// Rows whose trained networks are identical; only the head differs.
    pub fn shares_training_with(self, other: AblationRow) -> bool {
        let (_, ta, ca, _) = self.flags();
        let (_, tb, cb, _) = other.flags();
        ta == tb && ca == cb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_aliases() {
        let cfg = RunConfig::from_text(
            "# benchmark\nt = 0.1  # trigger\np=5\nhidden_dims = 32, 32\n\nuse_pca = off\ndistance_mode = euclidean\nood_data = a.txt, b.bin\n",
        )
        .unwrap();
        assert_eq!(cfg.train.fnr_threshold, 0.1);
        assert_eq!(cfg.train.validation_period, 5);
        assert_eq!(cfg.train.hidden_dims, vec![32, 32]);
        assert!(!cfg.use_pca);
        assert_eq!(cfg.distance_mode, DistanceMode::Euclidean);
        assert_eq!(cfg.ood_data.len(), 2);
    }

    #[test]
    fn resolved_echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("seed", "42").unwrap();
        cfg.set("train_data", "data/train.txt").unwrap();
        cfg.set("ood_data", "x.txt,y.txt").unwrap();
        let back = RunConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        for key in RunConfig::KEYS {
            assert!(cfg.to_text().contains(&format!("\n{key} = ")), "{key}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_text("nonsense = 1").is_err());
        assert!(RunConfig::from_text("seed").is_err());
        assert!(RunConfig::from_text("use_pca = maybe").is_err());
        assert!(RunConfig::from_text("learning_rate = -1").is_err());
        assert!(RunConfig::from_text("split = 0.5,0.5").is_err());
        let e = RunConfig::from_text("seed = x").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn ablation_flag_mapping() {
        let base = RunConfig::default();
        let r1 = AblationRow::RawMd.apply(&base);
        assert!(!r1.use_pca && !r1.use_triplet && !r1.use_clustering);
        assert_eq!(r1.distance_mode, DistanceMode::Mahalanobis);
        assert_eq!(r1.effective_train().triplet_weight, 0.0);
        assert!(!r1.effective_train().clustering);
        let r3 = AblationRow::PcaEd.apply(&base);
        assert!(r3.use_pca && r3.distance_mode == DistanceMode::Euclidean);
        assert!(AblationRow::RawMd.shares_training_with(AblationRow::PcaEd));
        assert!(!AblationRow::Maple.shares_training_with(AblationRow::TripletPcaMd));
    }
}
