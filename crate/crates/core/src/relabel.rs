//! Self-supervised relabelling: periodic validation, per-class
//! false-negative ratios, X-Means refinement of struggling classes into
//! pseudo-classes, and the training loop that ties it together.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cluster::xmeans;
use crate::dataio::{DatasetSplit, LabeledDataset};
use crate::error::{Error, NnError, RelabelError, Result};
use crate::linalg::Matrix;
use crate::nn::{argmax, MlpClassifier, Sgd, TrainConfig};
use crate::rng;

pub const STATE_MAGIC: &[u8; 4] = b"MRS1";

/// Total map from pseudo-class ids to original classes, with every
/// original class owning at least one pseudo-class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pseudo_to_original: Vec<usize>,
    num_original: usize,
}

impl LabelMap {
    pub fn new(pseudo_to_original: Vec<usize>, num_original: usize) -> Result<Self, RelabelError> {
        let mut seen = vec![false; num_original];
        for &o in &pseudo_to_original {
            if o >= num_original {
                return Err(RelabelError::Invariant(format!(
                    "pseudo-class maps to {o}, but k = {num_original}"
                )));
            }
            seen[o] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(RelabelError::Invariant(format!(
                "original class {missing} has no pseudo-class"
            )));
        }
        Ok(LabelMap {
            pseudo_to_original,
            num_original,
        })
    }

    pub fn identity(k: usize) -> Self {
        LabelMap {
            pseudo_to_original: (0..k).collect(),
            num_original: k,
        }
    }

    pub fn original(&self, pseudo: usize) -> usize {
        self.pseudo_to_original[pseudo]
    }

    pub fn pseudo_to_original(&self) -> &[usize] {
        &self.pseudo_to_original
    }

    /// Current pseudo-class count `K`.
    pub fn num_pseudo(&self) -> usize {
        self.pseudo_to_original.len()
    }

    /// Original class count `k`.
    pub fn num_original(&self) -> usize {
        self.num_original
    }

    pub fn pseudo_of(&self, original: usize) -> Vec<usize> {
        (0..self.num_pseudo())
            .filter(|&p| self.pseudo_to_original[p] == original)
            .collect()
    }

    pub fn remap(&self, pseudo: &[usize]) -> Vec<usize> {
        pseudo.iter().map(|&p| self.original(p)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineEvent {
    pub epoch: usize,
    pub classes_split: Vec<usize>,
    pub k_after: usize,
}

/// Pseudo-labels of the training samples and how they map back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelabelState {
    pub pseudo_labels: Vec<usize>,
    pub label_map: LabelMap,
    pub history: Vec<RefineEvent>,
}

impl RelabelState {
    /// Pseudo-labels equal to the original labels.
    pub fn initial(original_labels: &[usize], k: usize) -> Self {
        RelabelState {
            pseudo_labels: original_labels.to_vec(),
            label_map: LabelMap::identity(k),
            history: Vec::new(),
        }
    }

    pub fn num_pseudo(&self) -> usize {
        self.label_map.num_pseudo()
    }

    pub fn original_labels(&self) -> Vec<usize> {
        self.label_map.remap(&self.pseudo_labels)
    }

    pub fn check(&self, original: &[usize]) -> Result<(), RelabelError> {
        if self.pseudo_labels.iter().any(|&p| p >= self.num_pseudo()) {
            return Err(RelabelError::Invariant("pseudo-label out of range".into()));
        }
        if self.original_labels() != original {
            return Err(RelabelError::Invariant(
                "pseudo-labels do not remap to the original labels".into(),
            ));
        }
        Ok(())
    }

    /// `MRS1`: k, K, map, N, pseudo-labels, then the refine history.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut vals = vec![self.label_map.num_original(), self.num_pseudo()];
        vals.extend_from_slice(self.label_map.pseudo_to_original());
        vals.push(self.pseudo_labels.len());
        vals.extend_from_slice(&self.pseudo_labels);
        vals.push(self.history.len());
        for ev in &self.history {
            vals.push(ev.epoch);
            vals.push(ev.classes_split.len());
            vals.extend_from_slice(&ev.classes_split);
            vals.push(ev.k_after);
        }
        let mut w2 = Vec::with_capacity(4 + 8 * vals.len());
        w2.extend_from_slice(STATE_MAGIC);
        for v in vals {
            w2.extend_from_slice(&(v as u64).to_le_bytes());
        }
        w.write_all(&w2)
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, RelabelError> {
        let bad = |m: &str| RelabelError::Invariant(format!("corrupt relabel state: {m}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated"))?;
        if &magic != STATE_MAGIC {
            return Err(bad("missing MRS1 magic"));
        }
        let mut get = || -> Result<usize, RelabelError> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|_| bad("truncated"))?;
            Ok(u64::from_le_bytes(b) as usize)
        };
        let k = get()?;
        let kk = get()?;
        if kk > 1 << 24 {
            return Err(bad("implausible class count"));
        }
        let map = (0..kk).map(|_| get()).collect::<Result<Vec<_>, _>>()?;
        let n = get()?;
        if n > 1 << 32 {
            return Err(bad("implausible sample count"));
        }
        let pseudo_labels = (0..n).map(|_| get()).collect::<Result<Vec<_>, _>>()?;
        let events = get()?;
        let mut history = Vec::new();
        for _ in 0..events {
            let epoch = get()?;
            let len = get()?;
            if len > kk.max(k) {
                return Err(bad("implausible split list"));
            }
            let classes_split = (0..len).map(|_| get()).collect::<Result<Vec<_>, _>>()?;
            let k_after = get()?;
            history.push(RefineEvent {
                epoch,
                classes_split,
                k_after,
            });
        }
        let state = RelabelState {
            pseudo_labels,
            label_map: LabelMap::new(map, k)?,
            history,
        };
        if state.pseudo_labels.iter().any(|&p| p >= kk) {
            return Err(bad("pseudo-label out of range"));
        }
        Ok(state)
    }
}

/// Entry `(i, j)` counts samples of true class `i` predicted as `j`.
pub fn confusion_matrix(predicted: &[usize], truth: &[usize], k: usize) -> Vec<Vec<usize>> {
    assert_eq!(predicted.len(), truth.len(), "prediction/label length");
    let mut cm = vec![vec![0; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        cm[t][p] += 1;
    }
    cm
}

/// Share of class `class` samples predicted as something else.
pub fn false_negative_ratio(cm: &[Vec<usize>], class: usize) -> Result<f64, RelabelError> {
    let row = &cm[class];
    let total: usize = row.iter().sum();
    if total == 0 {
        return Err(RelabelError::ClassAbsent(class));
    }
    Ok((total - row[class]) as f64 / total as f64)
}

/// Per-class ratios; classes absent from validation read as 0 and are
/// therefore never triggered.
pub fn false_negative_ratios(cm: &[Vec<usize>]) -> Vec<f64> {
    (0..cm.len())
        .map(|c| match false_negative_ratio(cm, c) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{e}; treating its false-negative ratio as 0");
                0.0
            }
        })
        .collect()
}

/// Pairs each new cluster with the existing pseudo id it shares the most
/// members with, greedily by overlap, so surviving head rows keep
/// describing the same samples. Unpaired clusters get `None`.
fn match_clusters(
    assignments: &[usize],
    current: &[usize],
    owned: &[usize],
    clusters: usize,
) -> Vec<Option<usize>> {
    let mut overlap = vec![vec![0usize; owned.len()]; clusters];
    for (&c, p) in assignments.iter().zip(current) {
        if let Some(o) = owned.iter().position(|id| id == p) {
            overlap[c][o] += 1;
        }
    }
    let mut pairs: Vec<(usize, usize, usize)> = (0..clusters)
        .flat_map(|c| (0..owned.len()).map(move |o| (c, o)))
        .map(|(c, o)| (overlap[c][o], c, o))
        .filter(|p| p.0 > 0)
        .collect();
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; clusters];
    let mut taken = vec![false; owned.len()];
    for (_, c, o) in pairs {
        if out[c].is_none() && !taken[o] {
            out[c] = Some(owned[o]);
            taken[o] = true;
        }
    }
    out
}

/// Result of one refinement: the new state and how head rows move.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub state: RelabelState,
    /// `remap[new] = Some(old)` keeps an existing head row; `None` is fresh.
    pub head_remap: Vec<Option<usize>>,
    pub classes_split: Vec<usize>,
}

impl Refinement {
    pub fn changed(&self) -> bool {
        !self.classes_split.is_empty()
    }
}

/// Re-clusters every original class whose false-negative ratio exceeds
/// `threshold`.
///
/// A triggered class is clustered from scratch over all of its training
/// samples; its previous pseudo-split is discarded. New clusters take over
/// the class's existing pseudo ids by member overlap, extra clusters get
/// fresh ids at the end, and ids freed by a class that shrank are filled by
/// moving the highest ids down, so ids stay contiguous.
pub fn refine(
    embeddings: &Matrix,
    state: &RelabelState,
    fnr: &[f64],
    threshold: f64,
    max_clusters: usize,
    seed: u64,
) -> Result<Refinement> {
    let map = &state.label_map;
    let k = map.num_original();
    if embeddings.rows() != state.pseudo_labels.len() {
        return Err(Error::Config(format!(
            "{} embeddings for {} training labels",
            embeddings.rows(),
            state.pseudo_labels.len()
        )));
    }
    if fnr.len() != k {
        return Err(Error::Config(format!("{} ratios for {k} classes", fnr.len())));
    }
    let original = state.original_labels();
    let kk = map.num_pseudo();

    let mut new_labels = state.pseudo_labels.clone();
    let mut owner: Vec<Option<usize>> = map.pseudo_to_original().iter().map(|&o| Some(o)).collect();
    let mut fresh_from: Vec<bool> = vec![false; kk];
    let mut split = Vec::new();

    for class in 0..k {
        if fnr[class] <= threshold {
            continue;
        }
        let members: Vec<usize> = (0..original.len()).filter(|&i| original[i] == class).collect();
        if members.len() < 2 {
            log::warn!(
                "class {class} triggered with {} training samples; skipping",
                members.len()
            );
            continue;
        }
        let points = embeddings.select_rows(&members);
        let model = xmeans(&points, max_clusters, rng::derive(seed, &[rng::TAG_CLUSTER, class as u64]))?;
        log::debug!(
            "class {class}: {} clusters of sizes {:?}",
            model.num_clusters(),
            model.sizes()
        );
        let owned = map.pseudo_of(class);
        let current: Vec<usize> = members.iter().map(|&i| state.pseudo_labels[i]).collect();
        let matched = match_clusters(&model.assignments, &current, &owned, model.num_clusters());
        let spare: Vec<usize> = owned.iter().copied().filter(|id| !matched.contains(&Some(*id))).collect();
        let mut spare = spare.into_iter();
        let mut ids = Vec::with_capacity(model.num_clusters());
        for m in matched {
            let id = match m.or_else(|| spare.next()) {
                Some(id) => id,
                None => {
                    owner.push(Some(class));
                    fresh_from.push(true);
                    owner.len() - 1
                }
            };
            ids.push(id);
        }
        for &id in &owned {
            if !ids.contains(&id) {
                owner[id] = None;
            }
        }
        for (&i, &c) in members.iter().zip(&model.assignments) {
            new_labels[i] = ids[c];
        }
        split.push(class);
    }

    if split.is_empty() {
        return Ok(Refinement {
            state: state.clone(),
            head_remap: (0..kk).map(Some).collect(),
            classes_split: split,
        });
    }

    // Compact: fill freed ids with the highest live ids.
    let mut position: Vec<usize> = (0..owner.len()).collect();
    let live = owner.iter().filter(|o| o.is_some()).count();
    let mut high = owner.len();
    for hole in 0..live {
        if owner[hole].is_some() {
            continue;
        }
        high -= 1;
        while owner[high].is_none() {
            high -= 1;
        }
        owner.swap(hole, high);
        position[high] = hole;
    }
    owner.truncate(live);
    for l in new_labels.iter_mut() {
        *l = position[*l];
    }
    let mut head_remap = vec![None; live];
    for (old, &new) in position.iter().enumerate() {
        if new < live && (old < kk && !fresh_from[old]) && owner[new].is_some() {
            head_remap[new] = Some(old);
        }
    }
    let pseudo_to_original: Vec<usize> = owner.into_iter().map(|o| o.expect("compacted")).collect();
    let new_state = RelabelState {
        pseudo_labels: new_labels,
        label_map: LabelMap::new(pseudo_to_original, k)?,
        history: state.history.clone(),
    };
    new_state.check(&original)?;
    Ok(Refinement {
        state: new_state,
        head_remap,
        classes_split: split,
    })
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub ce_loss: f64,
    pub triplet_loss: f64,
    pub val_acc: f64,
    #[serde(rename = "K")]
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: MlpClassifier,
    pub state: RelabelState,
    pub log: Vec<EpochRecord>,
}

impl TrainOutput {
    /// Line-delimited JSON, one record per epoch.
    pub fn log_jsonl(&self) -> String {
        let mut s = String::new();
        for rec in &self.log {
            s.push_str(&serde_json::to_string(rec).expect("record serializes"));
            s.push('\n');
        }
        s
    }
}

/// Original-class predictions from the softmax head.
pub fn softmax_predictions(model: &MlpClassifier, map: &LabelMap, x: &Matrix) -> Result<Vec<usize>> {
    let (_, logits) = model.forward_batch(x)?;
    Ok(logits.row_iter().map(|l| map.original(argmax(l))).collect())
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Full training loop: SGD epochs over shuffled minibatches labelled with
/// the current pseudo-labels; every `validation_period` epochs the
/// validation confusion matrix decides which classes get re-clustered on
/// the training embeddings, and the head follows the new pseudo-classes.
pub fn train_maple(ds: &LabeledDataset, split: &DatasetSplit, config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    let k = ds.num_classes();
    if k < 2 {
        return Err(Error::Config("training needs at least two classes".into()));
    }
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::Config("train and validation splits must be nonempty".into()));
    }
    let x_train = ds.features().select_rows(&split.train);
    let y_train: Vec<usize> = split.train.iter().map(|&i| ds.labels()[i]).collect();
    let x_val = ds.features().select_rows(&split.val);
    let y_val: Vec<usize> = split.val.iter().map(|&i| ds.labels()[i]).collect();

    let mut model = MlpClassifier::new(
        ds.dim(),
        &config.hidden_dims,
        config.embedding_dim,
        k,
        config.seed,
    )?;
    let mut sgd = Sgd::new(&model);
    let mut state = RelabelState::initial(&y_train, k);
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let mut shuffle = rng::stream(config.seed, &[rng::TAG_SHUFFLE]);
    let mut log = Vec::with_capacity(config.max_epochs);
    let mut batch_labels = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle);
        let (mut ce_sum, mut trip_sum) = (0.0, 0.0);
        for chunk in order.chunks(config.batch_size) {
            let xb = x_train.select_rows(chunk);
            batch_labels.clear();
            batch_labels.extend(chunk.iter().map(|&i| state.pseudo_labels[i]));
            let loss = sgd.step(&mut model, &xb, &batch_labels, config).map_err(|e| match e {
                NnError::NonFiniteLoss { ce, triplet, step } => {
                    log::error!("non-finite loss at epoch {epoch}, step {step}");
                    NnError::NonFiniteLoss { ce, triplet, step }
                }
                other => other,
            })?;
            ce_sum += loss.cross_entropy * chunk.len() as f64;
            trip_sum += loss.triplet * chunk.len() as f64;
        }
        let n = order.len() as f64;
        let val_pred = softmax_predictions(&model, &state.label_map, &x_val)?;
        let val_acc = accuracy(&val_pred, &y_val);

        if config.clustering && epoch % config.validation_period == 0 {
            let cm = confusion_matrix(&val_pred, &y_val, k);
            let fnr = false_negative_ratios(&cm);
            log::debug!("epoch {epoch}: false-negative ratios {fnr:?}");
            let embeddings = model.embed(&x_train)?;
            let refinement = refine(
                &embeddings,
                &state,
                &fnr,
                config.fnr_threshold,
                config.max_clusters,
                rng::derive(config.seed, &[epoch as u64]),
            )?;
            if refinement.changed() {
                model.remap_head(
                    &refinement.head_remap,
                    rng::derive(config.seed, &[rng::TAG_RESIZE, epoch as u64]),
                )?;
                sgd.remap_head(&refinement.head_remap);
                state = refinement.state;
                log::info!(
                    "epoch {epoch}: re-clustered classes {:?}, K = {}",
                    refinement.classes_split,
                    state.num_pseudo()
                );
                state.history.push(RefineEvent {
                    epoch,
                    classes_split: refinement.classes_split,
                    k_after: state.num_pseudo(),
                });
            }
            state.check(&y_train)?;
        }

        log.push(EpochRecord {
            epoch,
            ce_loss: ce_sum / n,
            triplet_loss: trip_sum / n,
            val_acc,
            k: state.num_pseudo(),
        });
    }
    Ok(TrainOutput { model, state, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_cases() {
        assert_eq!(
            confusion_matrix(&[0, 1, 1, 0], &[0, 1, 0, 0], 2),
            vec![vec![2, 1], vec![0, 1]]
        );
        let perfect = confusion_matrix(&[0, 1, 2, 2], &[0, 1, 2, 2], 3);
        assert_eq!(perfect, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
        let all0 = confusion_matrix(&[0, 0, 0], &[0, 1, 2], 3);
        assert!(all0.iter().all(|r| r[1] == 0 && r[2] == 0));
    }

    #[test]
    fn fnr_cases() {
        let cm = vec![vec![7, 3], vec![0, 4]];
        assert!((false_negative_ratio(&cm, 0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(false_negative_ratio(&cm, 1).unwrap(), 0.0);
        let none = vec![vec![0, 5], vec![0, 0]];
        assert_eq!(false_negative_ratio(&none, 0).unwrap(), 1.0);
        assert!(matches!(
            false_negative_ratio(&none, 1),
            Err(RelabelError::ClassAbsent(1))
        ));
        assert_eq!(false_negative_ratios(&none), vec![1.0, 0.0]);
    }

    #[test]
    fn label_map_validation() {
        assert!(LabelMap::new(vec![0, 0, 1], 2).is_ok());
        assert!(LabelMap::new(vec![0, 0], 2).is_err());
        assert!(LabelMap::new(vec![0, 2], 2).is_err());
        let m = LabelMap::new(vec![1, 0, 1], 2).unwrap();
        assert_eq!(m.pseudo_of(1), vec![0, 2]);
        assert_eq!(m.remap(&[2, 1, 0]), vec![1, 0, 1]);
    }

    #[test]
    fn state_checkpoint_round_trip() {
        let state = RelabelState {
            pseudo_labels: vec![0, 2, 1, 0],
            label_map: LabelMap::new(vec![0, 1, 0], 2).unwrap(),
            history: vec![RefineEvent {
                epoch: 10,
                classes_split: vec![0],
                k_after: 3,
            }],
        };
        let mut buf = Vec::new();
        state.write(&mut buf).unwrap();
        assert_eq!(RelabelState::read(buf.as_slice()).unwrap(), state);
    }

    fn blobs(centres: &[(usize, f64)], per: usize, seed: u64) -> (Matrix, Vec<usize>, Vec<usize>) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = 4;
        let mut data = Vec::new();
        let (mut labels, mut modes) = (Vec::new(), Vec::new());
        for (m, &(class, x)) in centres.iter().enumerate() {
            for _ in 0..per {
                for j in 0..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data.push(z + if j == 0 { x } else { 0.0 });
                }
                labels.push(class);
                modes.push(m);
            }
        }
        (Matrix::from_vec(labels.len(), d, data), labels, modes)
    }

    #[test]
    fn untriggered_refine_is_identity() {
        let (x, labels, _) = blobs(&[(0, 0.0), (1, 30.0)], 50, 1);
        let state = RelabelState::initial(&labels, 2);
        let r = refine(&x, &state, &[0.3, 0.1], 0.3, 5, 7).unwrap();
        assert!(!r.changed());
        assert_eq!(r.state, state);
        assert_eq!(r.head_remap, vec![Some(0), Some(1)]);
    }

    #[test]
    fn three_blob_class_gains_two_pseudo_classes() {
        let (x, labels, modes) = blobs(&[(0, -20.0), (1, 60.0), (0, 0.0), (0, 20.0)], 150, 2);
        let state = RelabelState::initial(&labels, 2);
        let r = refine(&x, &state, &[0.5, 0.0], 0.3, 5, 3).unwrap();
        assert_eq!(r.state.num_pseudo(), 4);
        assert_eq!(r.classes_split, vec![0]);
        assert_eq!(r.state.original_labels(), labels);
        assert_eq!(r.head_remap[..2], [Some(0), Some(1)]);
        assert_eq!(r.head_remap[2..], [None, None]);
        let zero: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
        let got: Vec<usize> = zero.iter().map(|&i| r.state.pseudo_labels[i]).collect();
        let want: Vec<usize> = zero.iter().map(|&i| modes[i]).collect();
        assert_eq!(crate::cluster::adjusted_rand_index(&got, &want), 1.0);
        assert!(labels.iter().zip(&r.state.pseudo_labels).all(|(&l, &p)| l != 1 || p == 1));
    }

    #[test]
    fn reclustering_the_same_split_keeps_ids() {
        let (x, labels, _) = blobs(&[(0, -20.0), (1, 60.0), (0, 0.0), (0, 20.0)], 150, 4);
        let first = refine(&x, &RelabelState::initial(&labels, 2), &[0.5, 0.0], 0.3, 5, 3).unwrap();
        let again = refine(&x, &first.state, &[0.5, 0.0], 0.3, 5, 99).unwrap();
        assert_eq!(again.state.pseudo_labels, first.state.pseudo_labels);
        assert_eq!(again.head_remap, (0..4).map(Some).collect::<Vec<_>>());
    }

    #[test]
    fn retrigger_replaces_previous_split() {
        let (x, labels, _) = blobs(&[(0, -20.0), (1, 60.0), (0, 0.0), (0, 20.0)], 150, 5);
        let split = refine(&x, &RelabelState::initial(&labels, 2), &[0.5, 0.0], 0.3, 5, 3).unwrap();
        assert_eq!(split.state.num_pseudo(), 4);
        // Same labels, but class 0 now a single blob.
        let (single, _, _) = blobs(&[(0, 0.0), (1, 60.0), (0, 0.0), (0, 0.0)], 150, 6);
        let merged = refine(&single, &split.state, &[0.5, 0.0], 0.3, 5, 3).unwrap();
        assert_eq!(merged.state.num_pseudo(), 2);
        assert_eq!(merged.state.original_labels(), labels);
        assert_eq!(merged.head_remap.len(), 2);
        assert!(merged.head_remap.iter().all(|r| r.is_some()));
    }
}
