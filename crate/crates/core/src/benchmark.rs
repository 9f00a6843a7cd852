//! Synthetic end-to-end benchmark in ten dimensions. Modes lie along the
//! first axis in three far-apart blocks; block `b` holds one mode of class 0
//! next to a heavier mode of class `b + 1`, so class 0 has three modes
//! `block_gap` sigmas apart and each other class has one. The pair inside a
//! block is close, which makes the network sort out blocks before it sorts
//! out class 0. An OOD Gaussian sits further out on the same axis.

use serde::{Deserialize, Serialize};

use crate::dataio::{generate_mixture, DatasetSplit, LabeledDataset, MixtureClass, MixtureMode, MixtureSpec};
use crate::error::Result;
use crate::linalg::{sq_dist, Matrix};
use crate::nn::TrainConfig;
use crate::rng;

/// One Gaussian mode: its class, its centre in units of sigma (missing
/// trailing coordinates are zero) and how many samples it gets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePlacement {
    pub class: usize,
    pub offset: Vec<f64>,
    pub count: usize,
}

impl ModePlacement {
    pub fn new(class: usize, offset: &[f64], count: usize) -> Self {
        ModePlacement {
            class,
            offset: offset.to_vec(),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkLayout {
    pub dim: usize,
    /// Per-coordinate standard deviation of every mode.
    pub sigma: f64,
    pub modes: Vec<ModePlacement>,
    /// OOD centre in units of sigma.
    pub ood_offset: Vec<f64>,
    pub ood_count: usize,
    pub split: (f64, f64, f64),
}

/// Samples per class-0 mode; 500 of them land in the training split.
pub const PER_MODE: usize = 625;
pub const BLOCK_GAP: f64 = 60.0;
pub const PAIR_GAP: f64 = 7.0;
/// OOD distance past the outermost mode, in sigmas.
pub const OOD_DISTANCE: f64 = 160.0;

impl Default for BenchmarkLayout {
    fn default() -> Self {
        let modes = Self::blocks(BLOCK_GAP, PAIR_GAP, PER_MODE);
        let edge = modes.iter().map(|m| m.offset[0]).fold(f64::MIN, f64::max);
        BenchmarkLayout {
            dim: 10,
            sigma: 0.04,
            modes,
            ood_offset: vec![edge + OOD_DISTANCE],
            ood_count: 500,
            split: (0.8, 0.1, 0.1),
        }
    }
}

impl BenchmarkLayout {
    /// Three blocks centred at `-gap`, `0` and `gap` on the first axis. In
    /// block `b` the class-0 mode and a class `b + 1` mode with twice the
    /// samples sit `pair_gap` apart, on alternating sides.
    pub fn blocks(gap: f64, pair_gap: f64, per_mode: usize) -> Vec<ModePlacement> {
        let mut out = Vec::with_capacity(6);
        for b in 0..3 {
            let centre = (b as f64 - 1.0) * gap;
            let side = if b % 2 == 0 { 1.0 } else { -1.0 };
            out.push(ModePlacement::new(0, &[centre + side * pair_gap / 2.0], per_mode));
            out.push(ModePlacement::new(b + 1, &[centre - side * pair_gap / 2.0], 2 * per_mode));
        }
        out
    }

    pub fn num_classes(&self) -> usize {
        self.modes.iter().map(|m| m.class + 1).max().unwrap_or(0)
    }

    fn scaled(&self, offset: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for (x, o) in v.iter_mut().zip(offset) {
            *x = o * self.sigma;
        }
        v
    }

    /// Mode index of every generated row; rows come out class by class and,
    /// within a class, in the order the modes are listed.
    pub fn mode_of_rows(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in 0..self.num_classes() {
            for (i, m) in self.modes.iter().enumerate().filter(|(_, m)| m.class == c) {
                out.extend(std::iter::repeat_n(i, m.count));
            }
        }
        out
    }

    pub fn mode_means(&self) -> Vec<(usize, Vec<f64>)> {
        self.modes.iter().map(|m| (m.class, self.scaled(&m.offset))).collect()
    }

    pub fn ood_mean(&self) -> Vec<f64> {
        self.scaled(&self.ood_offset)
    }

    pub fn id_spec(&self, seed: u64) -> MixtureSpec {
        let mut classes: Vec<MixtureClass> = (0..self.num_classes())
            .map(|c| MixtureClass {
                name: format!("class{c}"),
                modes: Vec::new(),
            })
            .collect();
        for m in &self.modes {
            classes[m.class].modes.push(MixtureMode {
                mean: self.scaled(&m.offset),
                std: self.sigma,
                count: m.count,
            });
        }
        MixtureSpec { classes, seed }
    }

    pub fn ood_spec(&self, seed: u64) -> MixtureSpec {
        MixtureSpec {
            classes: vec![MixtureClass {
                name: "ood".into(),
                modes: vec![MixtureMode {
                    mean: self.ood_mean(),
                    std: self.sigma,
                    count: self.ood_count,
                }],
            }],
            seed,
        }
    }

    /// Smallest centre distance from the OOD Gaussian to any ID mode, in sigmas.
    pub fn ood_clearance(&self) -> f64 {
        let ood = self.ood_mean();
        self.mode_means()
            .iter()
            .map(|(_, m)| sq_dist(m, &ood).sqrt() / self.sigma)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest centre distance between two modes of the same class, in sigmas.
    pub fn min_same_class_separation(&self, class: usize) -> f64 {
        let means: Vec<Vec<f64>> = self
            .mode_means()
            .into_iter()
            .filter(|(c, _)| *c == class)
            .map(|(_, m)| m)
            .collect();
        let mut best = f64::INFINITY;
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                best = best.min(sq_dist(&means[i], &means[j]).sqrt() / self.sigma);
            }
        }
        best
    }
}

/// Training settings for the benchmark: library defaults except a smaller
/// step size, since the defaults oscillate on these inputs.
pub fn train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        seed,
        ..TrainConfig::default()
    }
}

/// Generated benchmark data.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub layout: BenchmarkLayout,
    pub data: LabeledDataset,
    pub split: DatasetSplit,
    pub ood: LabeledDataset,
}

impl Benchmark {
    pub fn generate(layout: BenchmarkLayout, seed: u64) -> Result<Self> {
        let data = generate_mixture(&layout.id_spec(rng::derive(seed, &[11])))?;
        let ood = generate_mixture(&layout.ood_spec(rng::derive(seed, &[12])))?;
        // Stratifying by mode also stratifies by class and gives every mode
        // its exact share of the training set.
        let modes = LabeledDataset::new(
            data.features().clone(),
            layout.mode_of_rows(),
            (0..layout.modes.len()).map(|i| format!("mode{i}")).collect(),
        )?;
        let split = crate::dataio::stratified_split(&modes, layout.split, seed)?;
        Ok(Benchmark {
            layout,
            data,
            split,
            ood,
        })
    }

    pub fn test(&self) -> LabeledDataset {
        self.data.subset(&self.split.test)
    }

    pub fn ood_features(&self) -> &Matrix {
        self.ood.features()
    }
}
