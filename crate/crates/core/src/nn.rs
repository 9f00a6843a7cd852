//! Feedforward classifier trained with cross-entropy plus triplet loss.
//!
//! Layout: `D → h₁ → … → hₙ → d → n_c`. Every hidden layer is followed by a
//! ReLU; the `d`-wide embedding layer is linear, and its output is what the
//! rest of the pipeline treats as the latent representation. The head maps
//! the embedding to one logit per (pseudo-)class and can grow when
//! relabelling adds classes.

use std::io::{Read, Write};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NnError;
use crate::linalg::{norm, Matrix};
use crate::rng;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MNN1";

/// Optimizer, loss and relabelling hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_dims: Vec<usize>,
    pub embedding_dim: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Triplet margin α.
    pub margin: f64,
    pub triplet_weight: f64,
    /// Validate (and possibly relabel) every `validation_period` epochs.
    pub validation_period: usize,
    /// Classes whose false-negative ratio exceeds this are re-clustered.
    pub fnr_threshold: f64,
    pub max_clusters: usize,
    /// Disables relabelling entirely when false.
    pub clustering: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_dims: vec![64, 64],
            embedding_dim: 16,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            batch_size: 128,
            max_epochs: 60,
            margin: 1.0,
            triplet_weight: 1.0,
            validation_period: 10,
            fnr_threshold: 0.3,
            max_clusters: 5,
            clustering: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::InvalidConfig(m.to_string()));
        let nonneg = |x: f64| x >= 0.0 && x.is_finite();
        if self.embedding_dim == 0 || self.hidden_dims.contains(&0) {
            return bad("layer widths must be positive");
        }
        if !nonneg(self.learning_rate) || !nonneg(self.momentum) || !nonneg(self.weight_decay) {
            return bad("learning_rate, momentum and weight_decay must be nonnegative");
        }
        if !nonneg(self.margin) || !nonneg(self.triplet_weight) {
            return bad("margin and triplet_weight must be nonnegative");
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.validation_period == 0 {
            return bad("batch_size, max_epochs and validation_period must be positive");
        }
        if !(0.0..=1.0).contains(&self.fnr_threshold) {
            return bad("fnr_threshold must lie in [0, 1]");
        }
        if self.max_clusters == 0 {
            return bad("max_clusters must be positive");
        }
        Ok(())
    }
}

/// Affine layer `y = W x + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Dense {
    fn uniform(inputs: usize, outputs: usize, rng: &mut ChaCha8Rng) -> Dense {
        let bound = 1.0 / (inputs as f64).sqrt();
        let w = (0..inputs * outputs)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let b = (0..outputs).map(|_| rng.random_range(-bound..bound)).collect();
        Dense {
            weights: Matrix::from_vec(outputs, inputs, w),
            bias: b,
        }
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            weights: Matrix::zeros(self.weights.rows(), self.weights.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    /// `X Wᵀ + b` for a batch `X` (rows are samples).
    fn apply(&self, x: &Matrix) -> Matrix {
        let (n, out) = (x.rows(), self.outputs());
        let mut y = Matrix::zeros(n, out);
        for i in 0..n {
            let xi = x.row(i);
            let yi = y.row_mut(i);
            for (o, (w, b)) in yi.iter_mut().zip(self.weights.row_iter().zip(&self.bias)) {
                *o = b + crate::linalg::dot(w, xi);
            }
        }
        y
    }

    fn apply_one(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .row_iter()
            .zip(&self.bias)
            .map(|(w, b)| b + crate::linalg::dot(w, x))
            .collect()
    }

    /// Remaps output rows; `None` draws a fresh fan-in uniform row.
    fn remap_rows(&self, remap: &[Option<usize>], rng: &mut ChaCha8Rng) -> Dense {
        let inputs = self.inputs();
        let bound = 1.0 / (inputs as f64).sqrt();
        let mut w = Vec::with_capacity(remap.len() * inputs);
        let mut b = Vec::with_capacity(remap.len());
        for r in remap {
            match *r {
                Some(old) => {
                    w.extend_from_slice(self.weights.row(old));
                    b.push(self.bias[old]);
                }
                None => {
                    w.extend((0..inputs).map(|_| rng.random_range(-bound..bound)));
                    b.push(rng.random_range(-bound..bound));
                }
            }
        }
        Dense {
            weights: Matrix::from_vec(remap.len(), inputs, w),
            bias: b,
        }
    }

    fn zero_remap(&self, remap: &[Option<usize>]) -> Dense {
        let inputs = self.inputs();
        let mut w = Vec::with_capacity(remap.len() * inputs);
        let mut b = Vec::with_capacity(remap.len());
        for r in remap {
            match *r {
                Some(old) => {
                    w.extend_from_slice(self.weights.row(old));
                    b.push(self.bias[old]);
                }
                None => {
                    w.extend(std::iter::repeat_n(0.0, inputs));
                    b.push(0.0);
                }
            }
        }
        Dense {
            weights: Matrix::from_vec(remap.len(), inputs, w),
            bias: b,
        }
    }
}

/// Parameter-shaped storage, used both for gradients and for momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub layers: Vec<Dense>,
    pub head: Dense,
}

impl ParamSet {
    /// Flattened in checkpoint order: each layer's weights then bias, head last.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in self.layers.iter().chain(std::iter::once(&self.head)) {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .chain(std::iter::once(&self.head))
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier {
    params: ParamSet,
    seed: u64,
}

/// Intermediate values of one batch forward pass.
struct Tape {
    /// Input of each non-head layer.
    inputs: Vec<Matrix>,
    /// Pre-activation of each non-head layer.
    pre: Vec<Matrix>,
    embedding: Matrix,
    logits: Matrix,
}

impl MlpClassifier {
    /// Fan-in uniform initialization, deterministic in `seed`.
    pub fn new(
        input_dim: usize,
        hidden_dims: &[usize],
        embedding_dim: usize,
        num_classes: usize,
        seed: u64,
    ) -> Result<Self, NnError> {
        if input_dim == 0 || embedding_dim == 0 || num_classes == 0 || hidden_dims.contains(&0) {
            return Err(NnError::InvalidConfig("layer widths must be positive".into()));
        }
        let mut rng = rng::stream(seed, &[rng::TAG_INIT]);
        let mut widths = vec![input_dim];
        widths.extend_from_slice(hidden_dims);
        widths.push(embedding_dim);
        let layers = widths
            .windows(2)
            .map(|w| Dense::uniform(w[0], w[1], &mut rng))
            .collect();
        let head = Dense::uniform(embedding_dim, num_classes, &mut rng);
        Ok(MlpClassifier {
            params: ParamSet { layers, head },
            seed,
        })
    }

    pub fn from_params(params: ParamSet, seed: u64) -> Result<Self, NnError> {
        let mut prev = None;
        for l in params.layers.iter().chain(std::iter::once(&params.head)) {
            if l.bias.len() != l.outputs() {
                return Err(NnError::InvalidConfig("bias length != layer outputs".into()));
            }
            if let Some(p) = prev {
                if l.inputs() != p {
                    return Err(NnError::InvalidConfig("consecutive layer widths differ".into()));
                }
            }
            prev = Some(l.outputs());
        }
        if params.layers.is_empty() {
            return Err(NnError::InvalidConfig("need an embedding layer".into()));
        }
        if params.slices().any(|s| s.iter().any(|x| !x.is_finite())) {
            return Err(NnError::InvalidConfig("non-finite parameter".into()));
        }
        Ok(MlpClassifier { params, seed })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.params.layers[0].inputs()
    }

    pub fn embedding_dim(&self) -> usize {
        self.params.head.inputs()
    }

    pub fn num_classes(&self) -> usize {
        self.params.head.outputs()
    }

    pub fn num_params(&self) -> usize {
        self.params.slices().map(<[f64]>::len).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params.flatten()
    }

    /// Inverse of [`MlpClassifier::flat_params`]. Panics on length mismatch.
    pub fn set_flat_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params(), "parameter count");
        let mut offset = 0;
        for s in self.params.slices_mut() {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        }
    }

    fn check_dim(&self, got: usize) -> Result<(), NnError> {
        if got != self.input_dim() {
            return Err(NnError::DimensionMismatch {
                expected: self.input_dim(),
                got,
            });
        }
        Ok(())
    }

    /// Returns `(embedding, logits)` for one input.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NnError> {
        self.check_dim(x.len())?;
        let last = self.params.layers.len() - 1;
        let mut h = x.to_vec();
        for (i, layer) in self.params.layers.iter().enumerate() {
            h = layer.apply_one(&h);
            if i < last {
                h.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        let logits = self.params.head.apply_one(&h);
        Ok((h, logits))
    }

    /// Batch forward: `(embeddings, logits)`, one row per input row.
    pub fn forward_batch(&self, x: &Matrix) -> Result<(Matrix, Matrix), NnError> {
        self.check_dim(x.cols())?;
        let tape = self.run(x);
        Ok((tape.embedding, tape.logits))
    }

    pub fn embed(&self, x: &Matrix) -> Result<Matrix, NnError> {
        Ok(self.forward_batch(x)?.0)
    }

    /// Signs of every hidden pre-activation; changes in this pattern mark
    /// the ReLU kinks where finite differences stop being valid.
    pub fn activation_pattern(&self, x: &Matrix) -> Result<Vec<bool>, NnError> {
        self.check_dim(x.cols())?;
        let tape = self.run(x);
        let last = tape.pre.len() - 1;
        Ok(tape.pre[..last]
            .iter()
            .flat_map(|m| m.as_slice().iter().map(|&v| v > 0.0))
            .collect())
    }

    fn run(&self, x: &Matrix) -> Tape {
        let last = self.params.layers.len() - 1;
        let mut inputs = Vec::with_capacity(last + 1);
        let mut pre = Vec::with_capacity(last + 1);
        let mut h = x.clone();
        for (i, layer) in self.params.layers.iter().enumerate() {
            let z = layer.apply(&h);
            inputs.push(h);
            h = z.clone();
            if i < last {
                h.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
            }
            pre.push(z);
        }
        let logits = self.params.head.apply(&h);
        Tape {
            inputs,
            pre,
            embedding: h,
            logits,
        }
    }

    /// Grows the head to `new_classes` rows. Existing rows are kept
    /// bit-exactly; new rows use the construction-time uniform init drawn
    /// from a stream keyed by `seed`.
    pub fn resize_head(&mut self, new_classes: usize, seed: u64) -> Result<(), NnError> {
        let current = self.num_classes();
        if new_classes < current {
            return Err(NnError::ShrinkUnsupported {
                current,
                requested: new_classes,
            });
        }
        let remap: Vec<Option<usize>> = (0..new_classes)
            .map(|i| (i < current).then_some(i))
            .collect();
        self.remap_head(&remap, seed)
    }

    /// Rebuilds the head so that new row `i` copies old row `remap[i]`, or
    /// is freshly initialized when `remap[i]` is `None`.
    pub fn remap_head(&mut self, remap: &[Option<usize>], seed: u64) -> Result<(), NnError> {
        let current = self.num_classes();
        if remap.is_empty() {
            return Err(NnError::InvalidConfig("head must keep at least one row".into()));
        }
        if let Some(&Some(bad)) = remap.iter().find(|r| matches!(r, Some(i) if *i >= current)) {
            return Err(NnError::LabelOutOfRange {
                label: bad,
                classes: current,
            });
        }
        let mut rng = rng::stream(seed, &[rng::TAG_RESIZE]);
        self.params.head = self.params.head.remap_rows(remap, &mut rng);
        Ok(())
    }

    /// Loss and exact gradient of
    /// `mean CE + triplet_weight · mean triplet` over the batch.
    pub fn loss_and_grad(
        &self,
        x: &Matrix,
        labels: &[usize],
        triplets: &[(usize, usize, usize)],
        triplet_weight: f64,
        margin: f64,
    ) -> Result<(LossParts, ParamSet), NnError> {
        self.check_batch(x, labels)?;
        let tape = self.run(x);
        let n = x.rows();
        let nc = self.num_classes();
        let d = self.embedding_dim();

        let mut ce = 0.0;
        let mut dlogits = Matrix::zeros(n, nc);
        for i in 0..n {
            let row = tape.logits.row(i);
            let lse = log_sum_exp(row);
            ce += lse - row[labels[i]];
            let g = dlogits.row_mut(i);
            for (gj, &z) in g.iter_mut().zip(row) {
                *gj = (z - lse).exp() / n as f64;
            }
            g[labels[i]] -= 1.0 / n as f64;
        }
        ce /= n as f64;

        let mut demb = Matrix::zeros(n, d);
        let mut trip = 0.0;
        if triplet_weight > 0.0 && !triplets.is_empty() {
            let scale = triplet_weight / triplets.len() as f64;
            for &(a, p, q) in triplets {
                let (ea, ep, en) = (
                    tape.embedding.row(a),
                    tape.embedding.row(p),
                    tape.embedding.row(q),
                );
                let dap: Vec<f64> = ea.iter().zip(ep).map(|(u, v)| u - v).collect();
                let dan: Vec<f64> = ea.iter().zip(en).map(|(u, v)| u - v).collect();
                let (nap, nan) = (norm(&dap), norm(&dan));
                let l = nap - nan + margin;
                if l <= 0.0 {
                    continue;
                }
                trip += l;
                // Subgradient 0 at coincident points.
                let gap = if nap > 0.0 { scale / nap } else { 0.0 };
                let gan = if nan > 0.0 { scale / nan } else { 0.0 };
                for k in 0..d {
                    demb[(a, k)] += gap * dap[k] - gan * dan[k];
                    demb[(p, k)] -= gap * dap[k];
                    demb[(q, k)] += gan * dan[k];
                }
            }
            trip /= triplets.len() as f64;
        }

        let head = &self.params.head;
        let mut head_grad = head.zeros_like();
        for i in 0..n {
            let g = dlogits.row(i);
            let e = tape.embedding.row(i);
            let de = demb.row_mut(i);
            for (c, &gc) in g.iter().enumerate() {
                if gc == 0.0 {
                    continue;
                }
                head_grad.bias[c] += gc;
                let wrow = head.weights.row(c);
                let grow = head_grad.weights.row_mut(c);
                for k in 0..d {
                    grow[k] += gc * e[k];
                    de[k] += gc * wrow[k];
                }
            }
        }

        let nl = self.params.layers.len();
        let mut layer_grads: Vec<Dense> = self.params.layers.iter().map(Dense::zeros_like).collect();
        let mut delta = demb;
        for li in (0..nl).rev() {
            if li < nl - 1 {
                for (dv, &z) in delta.as_mut_slice().iter_mut().zip(tape.pre[li].as_slice()) {
                    if z <= 0.0 {
                        *dv = 0.0;
                    }
                }
            }
            let layer = &self.params.layers[li];
            let input = &tape.inputs[li];
            let grad = &mut layer_grads[li];
            let mut next = Matrix::zeros(n, layer.inputs());
            for i in 0..n {
                let di = delta.row(i);
                let xi = input.row(i);
                let ni = next.row_mut(i);
                for (o, &g) in di.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    grad.bias[o] += g;
                    let grow = grad.weights.row_mut(o);
                    for (gw, &xv) in grow.iter_mut().zip(xi) {
                        *gw += g * xv;
                    }
                    if li > 0 {
                        for (nv, &w) in ni.iter_mut().zip(layer.weights.row(o)) {
                            *nv += g * w;
                        }
                    }
                }
            }
            delta = next;
        }

        Ok((
            LossParts {
                cross_entropy: ce,
                triplet: trip,
                total: ce + triplet_weight * trip,
            },
            ParamSet {
                layers: layer_grads,
                head: head_grad,
            },
        ))
    }

    /// Loss only, same definition as [`MlpClassifier::loss_and_grad`].
    pub fn loss(
        &self,
        x: &Matrix,
        labels: &[usize],
        triplets: &[(usize, usize, usize)],
        triplet_weight: f64,
        margin: f64,
    ) -> Result<LossParts, NnError> {
        self.check_batch(x, labels)?;
        let (emb, logits) = self.forward_batch(x)?;
        let n = x.rows() as f64;
        let ce = logits
            .row_iter()
            .zip(labels)
            .map(|(l, &y)| cross_entropy(l, y))
            .sum::<f64>()
            / n;
        let trip = if triplets.is_empty() || triplet_weight == 0.0 {
            0.0
        } else {
            triplets
                .iter()
                .map(|&(a, p, q)| triplet_loss(emb.row(a), emb.row(p), emb.row(q), margin))
                .sum::<f64>()
                / triplets.len() as f64
        };
        Ok(LossParts {
            cross_entropy: ce,
            triplet: trip,
            total: ce + triplet_weight * trip,
        })
    }

    fn check_batch(&self, x: &Matrix, labels: &[usize]) -> Result<(), NnError> {
        self.check_dim(x.cols())?;
        if labels.len() != x.rows() || labels.is_empty() {
            return Err(NnError::DimensionMismatch {
                expected: x.rows(),
                got: labels.len(),
            });
        }
        let nc = self.num_classes();
        if let Some(&bad) = labels.iter().find(|&&l| l >= nc) {
            return Err(NnError::LabelOutOfRange {
                label: bad,
                classes: nc,
            });
        }
        Ok(())
    }

    /// Serializes as `MNN1`: layer count, then per layer (out, in,
    /// row-major weights, bias) as little-endian u64/f64, then `n_c` and
    /// the init seed.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        let layers: Vec<&Dense> = self
            .params
            .layers
            .iter()
            .chain(std::iter::once(&self.params.head))
            .collect();
        w.write_all(&(layers.len() as u64).to_le_bytes())?;
        for l in layers {
            w.write_all(&(l.outputs() as u64).to_le_bytes())?;
            w.write_all(&(l.inputs() as u64).to_le_bytes())?;
            for x in l.weights.as_slice().iter().chain(&l.bias) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.write_all(&(self.num_classes() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self, NnError> {
        let corrupt = |m: &str| NnError::Checkpoint(m.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| corrupt("truncated magic"))?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(corrupt("missing MNN1 magic"));
        }
        let read_u64 = |r: &mut R| -> Result<u64, NnError> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|_| corrupt("truncated"))?;
            Ok(u64::from_le_bytes(b))
        };
        let count = read_u64(&mut r)? as usize;
        if !(2..=1024).contains(&count) {
            return Err(corrupt("implausible layer count"));
        }
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let out = read_u64(&mut r)? as usize;
            let inp = read_u64(&mut r)? as usize;
            if out == 0 || inp == 0 || out.saturating_mul(inp) > 1 << 28 {
                return Err(corrupt("implausible layer shape"));
            }
            let mut vals = Vec::with_capacity(out * inp + out);
            for _ in 0..out * inp + out {
                vals.push(f64::from_bits(read_u64(&mut r)?));
            }
            let bias = vals.split_off(out * inp);
            layers.push(Dense {
                weights: Matrix::from_vec(out, inp, vals),
                bias,
            });
        }
        let nc = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let head = layers.pop().expect("count >= 2");
        if head.outputs() != nc {
            return Err(corrupt("class count does not match head rows"));
        }
        MlpClassifier::from_params(ParamSet { layers, head }, seed)
            .map_err(|e| NnError::Checkpoint(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub cross_entropy: f64,
    pub triplet: f64,
    pub total: f64,
}

pub fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(z);
    z.iter().map(|v| (v - lse).exp()).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = i;
        }
    }
    best
}

/// `−log softmax(logits)[label]`, via a max-shifted log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    log_sum_exp(logits) - logits[label]
}

/// `max(‖a − p‖ − ‖a − n‖ + α, 0)`
pub fn triplet_loss(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> f64 {
    let dap = crate::linalg::sq_dist(anchor, positive).sqrt();
    let dan = crate::linalg::sq_dist(anchor, negative).sqrt();
    (dap - dan + margin).max(0.0)
}

/// One `(anchor, positive, negative)` triple per anchor that has at least
/// one other same-label sample and one different-label sample in the batch.
/// Positives and negatives are drawn uniformly.
pub fn mine_triplets(labels: &[usize], seed: u64) -> Vec<(usize, usize, usize)> {
    let mut rng = rng::stream(seed, &[rng::TAG_MINING]);
    let mut out = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (a, &la) in labels.iter().enumerate() {
        pos.clear();
        neg.clear();
        for (j, &lj) in labels.iter().enumerate() {
            if lj == la {
                if j != a {
                    pos.push(j);
                }
            } else {
                neg.push(j);
            }
        }
        if let (Some(&p), Some(&n)) = (pos.choose(&mut rng), neg.choose(&mut rng)) {
            out.push((a, p, n));
        }
    }
    out
}

/// SGD with heavy-ball momentum and L2 weight decay:
/// `v ← μ v + (g + λ θ)`, `θ ← θ − η v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sgd {
    velocity: ParamSet,
    steps: u64,
}

impl Sgd {
    pub fn new(model: &MlpClassifier) -> Self {
        Sgd {
            velocity: ParamSet {
                layers: model.params.layers.iter().map(Dense::zeros_like).collect(),
                head: model.params.head.zeros_like(),
            },
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn velocity(&self) -> &ParamSet {
        &self.velocity
    }

    /// Mirrors [`MlpClassifier::remap_head`]; fresh rows start at zero.
    pub fn remap_head(&mut self, remap: &[Option<usize>]) {
        self.velocity.head = self.velocity.head.zero_remap(remap);
    }

    /// One optimizer step on a minibatch. Triplets are mined from a stream
    /// keyed by `(config.seed, step index)`.
    pub fn step(
        &mut self,
        model: &mut MlpClassifier,
        x: &Matrix,
        labels: &[usize],
        config: &TrainConfig,
    ) -> Result<LossParts, NnError> {
        let triplets = if config.triplet_weight > 0.0 {
            mine_triplets(labels, rng::derive(config.seed, &[self.steps]))
        } else {
            Vec::new()
        };
        let (loss, grad) =
            model.loss_and_grad(x, labels, &triplets, config.triplet_weight, config.margin)?;
        if !loss.total.is_finite() {
            return Err(NnError::NonFiniteLoss {
                ce: loss.cross_entropy,
                triplet: loss.triplet,
                step: self.steps,
            });
        }
        self.apply(model, &grad, config);
        self.steps += 1;
        Ok(loss)
    }

    fn apply(&mut self, model: &mut MlpClassifier, grad: &ParamSet, config: &TrainConfig) {
        let (lr, mu, wd) = (config.learning_rate, config.momentum, config.weight_decay);
        let params = model.params.slices_mut();
        let vel = self.velocity.slices_mut();
        for ((p, v), g) in params.zip(vel).zip(grad.slices()) {
            for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                *vi = mu * *vi + gi + wd * *pi;
                *pi -= lr * *vi;
            }
        }
    }
}
