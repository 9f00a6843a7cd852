//! Inference in the reduced latent space: standardized PCA, per-class
//! centroids with one pooled covariance, Mahalanobis/Euclidean distances,
//! and the χ²-based predictive probability and uncertainty.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::MahalError;
use crate::linalg::{symmetric_eigen, Cholesky, Matrix};
use crate::relabel::LabelMap;
use crate::special::chi2_sf;

pub const DEFAULT_VARIANCE_TARGET: f64 = 0.95;
pub const HEAD_MAGIC: &[u8; 4] = b"MGH1";
pub const PCA_MAGIC: &[u8; 4] = b"MPC1";

/// First diagonal jitter tried when the pooled covariance will not factor.
pub const JITTER_START: f64 = 1e-20;
/// Jitter grows ×10 per retry up to this value.
pub const JITTER_MAX: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcaConfig {
    pub variance_target: f64,
    /// Divide each centred dimension by its standard deviation before the
    /// eigendecomposition.
    pub standardize: bool,
}

impl Default for PcaConfig {
    fn default() -> Self {
        PcaConfig {
            variance_target: DEFAULT_VARIANCE_TARGET,
            standardize: true,
        }
    }
}

/// `g(x) = Cᵀ ((x − mean) / std)` with `C` the leading `d′` eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Dimensions whose training variance was zero; their std is set to 1.
    pub zero_variance: Vec<bool>,
    /// `d × d′`, orthonormal columns.
    pub components: Matrix,
    /// Full descending spectrum of the (standardized) covariance.
    pub eigenvalues: Vec<f64>,
    pub explained_fraction: f64,
    pub variance_target: f64,
}

impl PcaTransform {
    /// Pass-through transform of width `d`, used when reduction is disabled.
    pub fn identity(d: usize) -> Self {
        PcaTransform {
            mean: vec![0.0; d],
            std: vec![1.0; d],
            zero_variance: vec![false; d],
            components: Matrix::identity(d),
            eigenvalues: Vec::new(),
            explained_fraction: 1.0,
            variance_target: 1.0,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.cols()
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, MahalError> {
        if x.len() != self.input_dim() {
            return Err(MahalError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(self.components.tr_mul_vec(&self.standardize(x)))
    }

    pub fn transform_batch(&self, x: &Matrix) -> Result<Matrix, MahalError> {
        let mut out = Vec::with_capacity(x.rows() * self.output_dim());
        for row in x.row_iter() {
            out.extend(self.transform(row)?);
        }
        Ok(Matrix::from_vec(x.rows(), self.output_dim(), out))
    }

    /// Back-projection of a reduced vector into the standardized space.
    pub fn reconstruct_standardized(&self, z: &[f64]) -> Vec<f64> {
        self.components.mul_vec(z)
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(PCA_MAGIC)?;
        write_u64(&mut w, self.input_dim() as u64)?;
        write_u64(&mut w, self.output_dim() as u64)?;
        write_u64(&mut w, self.eigenvalues.len() as u64)?;
        write_f64s(&mut w, &[self.variance_target, self.explained_fraction])?;
        write_f64s(&mut w, &self.mean)?;
        write_f64s(&mut w, &self.std)?;
        for &z in &self.zero_variance {
            write_u64(&mut w, z as u64)?;
        }
        write_f64s(&mut w, self.components.as_slice())?;
        write_f64s(&mut w, &self.eigenvalues)
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, MahalError> {
        read_magic(&mut r, PCA_MAGIC)?;
        let d = read_dim(&mut r)?;
        let dp = read_dim(&mut r)?;
        let ne = read_u64(&mut r)? as usize;
        if dp > d || ne > d {
            return Err(MahalError::Checkpoint("inconsistent PCA dimensions".into()));
        }
        let head = read_f64s(&mut r, 2)?;
        let mean = read_f64s(&mut r, d)?;
        let std = read_f64s(&mut r, d)?;
        let mut zero_variance = Vec::with_capacity(d);
        for _ in 0..d {
            zero_variance.push(read_u64(&mut r)? != 0);
        }
        let components = Matrix::from_vec(d, dp, read_f64s(&mut r, d * dp)?);
        let eigenvalues = read_f64s(&mut r, ne)?;
        if std.iter().any(|&s| !(s > 0.0)) {
            return Err(MahalError::Checkpoint("non-positive std".into()));
        }
        let gram = components.transpose().matmul(&components);
        if gram.max_abs_diff(&Matrix::identity(dp)) > 1e-9 {
            return Err(MahalError::Checkpoint("components not orthonormal".into()));
        }
        Ok(PcaTransform {
            mean,
            std,
            zero_variance,
            components,
            eigenvalues,
            explained_fraction: head[1],
            variance_target: head[0],
        })
    }
}

/// Standardized PCA keeping the fewest leading components whose eigenvalue
/// sum reaches `variance_target` of the trace.
pub fn fit_pca(embeddings: &Matrix, variance_target: f64) -> Result<PcaTransform, MahalError> {
    fit_pca_with(
        embeddings,
        PcaConfig {
            variance_target,
            standardize: true,
        },
    )
}

pub fn fit_pca_with(embeddings: &Matrix, config: PcaConfig) -> Result<PcaTransform, MahalError> {
    let n = embeddings.rows();
    let d = embeddings.cols();
    if n < 2 {
        return Err(MahalError::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mut mean = vec![0.0; d];
    for row in embeddings.row_iter() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / nf;
        }
    }
    let mut var = vec![0.0; d];
    for row in embeddings.row_iter() {
        for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - m) * (x - m) / nf;
        }
    }
    let zero_variance: Vec<bool> = var.iter().map(|&v| v <= 0.0).collect();
    let std: Vec<f64> = var
        .iter()
        .zip(&zero_variance)
        .map(|(&v, &z)| if z || !config.standardize { 1.0 } else { v.sqrt() })
        .collect();

    let mut cov = Matrix::zeros(d, d);
    let mut s = vec![0.0; d];
    for row in embeddings.row_iter() {
        for i in 0..d {
            s[i] = (row[i] - mean[i]) / std[i];
        }
        for a in 0..d {
            if s[a] == 0.0 {
                continue;
            }
            for b in a..d {
                cov[(a, b)] += s[a] * s[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[(a, b)] /= nf;
            cov[(b, a)] = cov[(a, b)];
        }
    }

    let eig = symmetric_eigen(&cov);
    let eigenvalues: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let trace: f64 = eigenvalues.iter().sum();
    if !(trace > 0.0) {
        return Err(MahalError::ZeroVariance);
    }
    let goal = config.variance_target * trace;
    let mut prefix = 0.0;
    let mut keep = d;
    for (i, &v) in eigenvalues.iter().enumerate() {
        prefix += v;
        // Relative slack absorbs summation rounding at exact boundaries.
        if prefix >= goal * (1.0 - 1e-12) {
            keep = i + 1;
            break;
        }
    }
    let explained_fraction = eigenvalues[..keep].iter().sum::<f64>() / trace;
    let mut components = Matrix::zeros(d, keep);
    for j in 0..keep {
        for i in 0..d {
            components[(i, j)] = eig.vectors[(i, j)];
        }
    }
    Ok(PcaTransform {
        mean,
        std,
        zero_variance,
        components,
        eigenvalues,
        explained_fraction,
        variance_target: config.variance_target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    Mahalanobis,
    Euclidean,
}

impl std::str::FromStr for DistanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mahalanobis" | "md" => Ok(DistanceMode::Mahalanobis),
            "euclidean" | "ed" => Ok(DistanceMode::Euclidean),
            other => Err(format!("unknown distance mode {other:?}")),
        }
    }
}

impl std::fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceMode::Mahalanobis => "mahalanobis",
            DistanceMode::Euclidean => "euclidean",
        })
    }
}

/// Class centroids and the pooled covariance of class-centred samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHead {
    centroids: Matrix,
    covariance: Matrix,
    factor: Cholesky,
    jitter: f64,
    label_map: LabelMap,
}

impl GaussianHead {
    /// `μ_c` is the mean of class `c`; `Σ = (1/N) Σ_c Σ_{i∈c} (z_i − μ_c)(z_i − μ_c)ᵀ`.
    pub fn fit(z: &Matrix, pseudo_labels: &[usize], label_map: LabelMap) -> Result<Self, MahalError> {
        let n = z.rows();
        let d = z.cols();
        let k = label_map.num_pseudo();
        if pseudo_labels.len() != n {
            return Err(MahalError::DimensionMismatch {
                expected: n,
                got: pseudo_labels.len(),
            });
        }
        if let Some(&bad) = pseudo_labels.iter().find(|&&c| c >= k) {
            return Err(MahalError::EmptyClass(bad));
        }
        let mut centroids = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (row, &c) in z.row_iter().zip(pseudo_labels) {
            counts[c] += 1;
            for (m, x) in centroids.row_mut(c).iter_mut().zip(row) {
                *m += x;
            }
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(MahalError::EmptyClass(empty));
        }
        for (c, &cnt) in counts.iter().enumerate() {
            centroids.row_mut(c).iter_mut().for_each(|m| *m /= cnt as f64);
        }
        let mut covariance = Matrix::zeros(d, d);
        let mut diff = vec![0.0; d];
        for (row, &c) in z.row_iter().zip(pseudo_labels) {
            for ((df, x), m) in diff.iter_mut().zip(row).zip(centroids.row(c)) {
                *df = x - m;
            }
            for a in 0..d {
                for b in a..d {
                    covariance[(a, b)] += diff[a] * diff[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                covariance[(a, b)] /= n as f64;
                covariance[(b, a)] = covariance[(a, b)];
            }
        }
        let (factor, jitter) = factor_with_jitter(&covariance)?;
        Ok(GaussianHead {
            centroids,
            covariance,
            factor,
            jitter,
            label_map,
        })
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    /// Diagonal jitter that made the covariance factor (0 when none needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn num_classes(&self) -> usize {
        self.centroids.rows()
    }

    /// χ² degrees of freedom `d′`.
    pub fn dof(&self) -> usize {
        self.centroids.cols()
    }

    /// `sqrt((z − μ_c)ᵀ Σ⁻¹ (z − μ_c))` via a triangular solve.
    pub fn mahalanobis(&self, z: &[f64], class: usize) -> f64 {
        let diff: Vec<f64> = z.iter().zip(self.centroids.row(class)).map(|(a, b)| a - b).collect();
        crate::linalg::norm(&self.factor.solve_lower(&diff))
    }

    pub fn euclidean(&self, z: &[f64], class: usize) -> f64 {
        crate::linalg::sq_dist(z, self.centroids.row(class)).sqrt()
    }

    pub fn distance(&self, z: &[f64], class: usize, mode: DistanceMode) -> f64 {
        match mode {
            DistanceMode::Mahalanobis => self.mahalanobis(z, class),
            DistanceMode::Euclidean => self.euclidean(z, class),
        }
    }

    /// `MGH1`: d′, K, k, label map, centroids, covariance, jitter.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(HEAD_MAGIC)?;
        write_u64(&mut w, self.dof() as u64)?;
        write_u64(&mut w, self.num_classes() as u64)?;
        write_u64(&mut w, self.label_map.num_original() as u64)?;
        for &o in self.label_map.pseudo_to_original() {
            write_u64(&mut w, o as u64)?;
        }
        write_f64s(&mut w, self.centroids.as_slice())?;
        write_f64s(&mut w, self.covariance.as_slice())?;
        write_f64s(&mut w, &[self.jitter])
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, MahalError> {
        let bad = |m: &str| MahalError::Checkpoint(m.to_string());
        read_magic(&mut r, HEAD_MAGIC)?;
        let d = read_dim(&mut r)?;
        let k = read_dim(&mut r)?;
        let orig = read_dim(&mut r)?;
        let mut map = Vec::with_capacity(k);
        for _ in 0..k {
            map.push(read_u64(&mut r)? as usize);
        }
        let label_map = LabelMap::new(map, orig).map_err(|e| bad(&e.to_string()))?;
        let centroids = Matrix::from_vec(k, d, read_f64s(&mut r, k * d)?);
        let covariance = Matrix::from_vec(d, d, read_f64s(&mut r, d * d)?);
        let jitter = read_f64s(&mut r, 1)?[0];
        if covariance.max_abs_diff(&covariance.transpose()) > 1e-12 {
            return Err(bad("covariance not symmetric"));
        }
        if !centroids.is_finite() || !covariance.is_finite() || !(jitter >= 0.0) {
            return Err(bad("non-finite values"));
        }
        let mut jittered = covariance.clone();
        for i in 0..d {
            jittered[(i, i)] += jitter;
        }
        let factor = Cholesky::factor(&jittered).ok_or_else(|| bad("covariance does not factor"))?;
        if factor.reconstruct().max_abs_diff(&jittered) > 1e-9 {
            return Err(bad("factorization does not reproduce covariance"));
        }
        Ok(GaussianHead {
            centroids,
            covariance,
            factor,
            jitter,
            label_map,
        })
    }
}

/// Plain Cholesky first; on failure retry with `JITTER_START` on the
/// diagonal, ×10 per attempt, up to `JITTER_MAX`.
pub fn factor_with_jitter(cov: &Matrix) -> Result<(Cholesky, f64), MahalError> {
    if let Some(f) = Cholesky::factor(cov) {
        return Ok((f, 0.0));
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut m = cov.clone();
        for i in 0..m.rows() {
            m[(i, i)] += jitter;
        }
        if let Some(f) = Cholesky::factor(&m) {
            log::debug!("covariance factored with diagonal jitter {jitter:e}");
            return Ok((f, jitter));
        }
        jitter *= 10.0;
    }
    Err(MahalError::SingularCovariance { jitter: JITTER_MAX })
}

/// Distance-based prediction for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `label_map[c*]`.
    pub original_class: usize,
    /// `c* = argmin_c distance_c`, lowest index on ties.
    pub pseudo_class: usize,
    /// `1 − χ²_{d′}.cdf(distance_{c*}²)`.
    pub p_md: f64,
    /// `1 − p_md`.
    pub uncertainty: f64,
    pub distances: Vec<f64>,
    /// Remapped argmax of the logits, when they were supplied.
    pub softmax_class: Option<usize>,
}

impl Prediction {
    pub fn min_distance(&self) -> f64 {
        self.distances[self.pseudo_class]
    }
}

/// Prediction from an already-reduced sample `z`.
pub fn predict_reduced(
    head: &GaussianHead,
    z: &[f64],
    logits: Option<&[f64]>,
    mode: DistanceMode,
) -> Prediction {
    let distances: Vec<f64> = (0..head.num_classes()).map(|c| head.distance(z, c, mode)).collect();
    let mut best = 0;
    for (c, &d) in distances.iter().enumerate() {
        if d < distances[best] {
            best = c;
        }
    }
    let md = distances[best];
    let p_md = chi2_sf(md * md, head.dof());
    Prediction {
        original_class: head.label_map.original(best),
        pseudo_class: best,
        p_md,
        uncertainty: 1.0 - p_md,
        distances,
        softmax_class: logits.map(|l| head.label_map.original(crate::nn::argmax(l))),
    }
}

/// Reduce the raw embedding with `pca`, then classify against `head`.
pub fn predict(
    pca: &PcaTransform,
    head: &GaussianHead,
    embedding: &[f64],
    logits: Option<&[f64]>,
    mode: DistanceMode,
) -> Result<Prediction, MahalError> {
    let z = pca.transform(embedding)?;
    if z.len() != head.dof() {
        return Err(MahalError::DimensionMismatch {
            expected: head.dof(),
            got: z.len(),
        });
    }
    Ok(predict_reduced(head, &z, logits, mode))
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64s<W: Write>(w: &mut W, vals: &[f64]) -> std::io::Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(), MahalError> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)
        .map_err(|_| MahalError::Checkpoint("truncated magic".into()))?;
    if &m != magic {
        return Err(MahalError::Checkpoint(format!(
            "expected magic {}",
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, MahalError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|_| MahalError::Checkpoint("truncated".into()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_dim<R: Read>(r: &mut R) -> Result<usize, MahalError> {
    let v = read_u64(r)? as usize;
    if v == 0 || v > 1 << 20 {
        return Err(MahalError::Checkpoint(format!("implausible dimension {v}")));
    }
    Ok(v)
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>, MahalError> {
    (0..n).map(|_| read_u64(r).map(f64::from_bits)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn head_from(centroids: Matrix, covariance: Matrix) -> GaussianHead {
        let (factor, jitter) = factor_with_jitter(&covariance).unwrap();
        let k = centroids.rows();
        GaussianHead {
            centroids,
            covariance,
            factor,
            jitter,
            label_map: LabelMap::identity(k),
        }
    }

    #[test]
    fn pca_rank_one_line() {
        let rows: Vec<[f64; 3]> = (0..20)
            .map(|i| {
                let t = i as f64 - 7.3;
                [t, 2.0 * t, -0.5 * t]
            })
            .collect();
        let pca = fit_pca(&Matrix::from_rows(&rows), 0.95).unwrap();
        assert_eq!(pca.output_dim(), 1);
        assert!((pca.explained_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pca_mean_maps_to_origin() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 1.0], [0.0, 5.0], [2.0, 2.0]]);
        let pca = fit_pca(&x, 0.95).unwrap();
        let z = pca.transform(&pca.mean).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            pca.transform(&[1.0]),
            Err(MahalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pca_rejects_constant_data() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]);
        assert!(matches!(fit_pca(&x, 0.95), Err(MahalError::ZeroVariance)));
    }

    #[test]
    fn pca_flags_zero_variance_dimension() {
        let x = Matrix::from_rows(&[[1.0, 4.0, 0.0], [2.0, 4.0, 1.0], [0.5, 4.0, -1.0]]);
        let pca = fit_pca(&x, 0.95).unwrap();
        assert_eq!(pca.zero_variance, vec![false, true, false]);
        assert_eq!(pca.std[1], 1.0);
    }

    #[test]
    fn head_on_four_points() {
        let z = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]);
        let head = GaussianHead::fit(&z, &[0; 4], LabelMap::identity(1)).unwrap();
        assert_eq!(head.centroids().row(0), &[0.0, 0.0]);
        assert_eq!(*head.covariance(), Matrix::from_rows(&[[0.5, 0.0], [0.0, 0.5]]));
        assert_eq!(head.jitter(), 0.0);
    }

    #[test]
    fn head_degenerate_covariance_uses_jitter() {
        let z = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [4.0, -2.0], [4.0, -2.0]]);
        let head = GaussianHead::fit(&z, &[0, 0, 1, 1], LabelMap::identity(2)).unwrap();
        assert_eq!(*head.covariance(), Matrix::zeros(2, 2));
        assert!(head.jitter() >= JITTER_START);
        assert_eq!(head.mahalanobis(&[1.0, 1.0], 0), 0.0);
        assert_eq!(head.mahalanobis(&[4.0, -2.0], 1), 0.0);
    }

    #[test]
    fn head_empty_class_rejected() {
        let z = Matrix::from_rows(&[[1.0], [2.0]]);
        assert!(matches!(
            GaussianHead::fit(&z, &[0, 0], LabelMap::identity(2)),
            Err(MahalError::EmptyClass(1))
        ));
    }

    #[test]
    fn head_class_permutation() {
        let z = Matrix::from_rows(&[[0.0, 1.0], [0.5, 1.5], [3.0, 3.0], [4.0, 2.0], [3.5, 2.0]]);
        let a = GaussianHead::fit(&z, &[0, 0, 1, 1, 1], LabelMap::identity(2)).unwrap();
        let b = GaussianHead::fit(&z, &[1, 1, 0, 0, 0], LabelMap::identity(2)).unwrap();
        assert_eq!(a.centroids().row(0), b.centroids().row(1));
        assert_eq!(a.centroids().row(1), b.centroids().row(0));
        assert!(a.covariance().max_abs_diff(b.covariance()) < 1e-15);
    }

    #[test]
    fn mahalanobis_cases() {
        let h = head_from(Matrix::from_rows(&[[1.0, 2.0]]), Matrix::identity(2));
        assert_eq!(h.mahalanobis(&[1.0, 2.0], 0), 0.0);
        assert!((h.mahalanobis(&[4.0, 6.0], 0) - 5.0).abs() < 1e-15);
        assert_eq!(h.mahalanobis(&[4.0, 6.0], 0), h.euclidean(&[4.0, 6.0], 0));

        let h = head_from(Matrix::from_rows(&[[0.0, 0.0]]), Matrix::from_rows(&[[4.0, 0.0], [0.0, 1.0]]));
        assert!((h.mahalanobis(&[2.0, 3.0], 0) - 10f64.sqrt()).abs() < 1e-15);
        assert!((h.euclidean(&[2.0, 3.0], 0) - 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn predict_closed_form_dof2() {
        let h = head_from(Matrix::from_rows(&[[0.0, 0.0], [10.0, 0.0]]), Matrix::identity(2));
        let p = predict_reduced(&h, &[1.0, 0.0], None, DistanceMode::Mahalanobis);
        assert_eq!(p.pseudo_class, 0);
        assert!((p.min_distance() - 1.0).abs() < 1e-15);
        assert!((p.p_md - (-0.5f64).exp()).abs() < 1e-12);
        assert!((p.uncertainty - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((p.p_md - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn predict_at_centroid_and_ties() {
        let h = head_from(Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0]]), Matrix::identity(2));
        let p = predict_reduced(&h, &[2.0, 0.0], Some(&[0.1, 3.0]), DistanceMode::Mahalanobis);
        assert_eq!((p.pseudo_class, p.p_md, p.uncertainty), (1, 1.0, 0.0));
        assert_eq!(p.softmax_class, Some(1));
        let tie = predict_reduced(&h, &[1.0, 5.0], None, DistanceMode::Mahalanobis);
        assert_eq!(tie.pseudo_class, 0);
    }

    #[test]
    fn head_checkpoint_round_trip() {
        let z = Matrix::from_rows(&[[0.0, 1.0], [0.5, 1.5], [3.0, 3.0], [4.0, 2.0], [3.5, 2.5]]);
        let map = LabelMap::new(vec![0, 0], 1).unwrap();
        let h = GaussianHead::fit(&z, &[0, 0, 1, 1, 1], map).unwrap();
        let mut buf = Vec::new();
        h.write(&mut buf).unwrap();
        assert_eq!(GaussianHead::read(buf.as_slice()).unwrap(), h);
        buf.truncate(buf.len() - 1);
        assert!(GaussianHead::read(buf.as_slice()).is_err());
    }

    #[test]
    fn pca_checkpoint_round_trip() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 0.0], [3.0, 1.0, 1.0], [0.0, 5.0, 2.0], [2.0, 2.0, 2.5]]);
        let pca = fit_pca(&x, 0.95).unwrap();
        let mut buf = Vec::new();
        pca.write(&mut buf).unwrap();
        assert_eq!(PcaTransform::read(buf.as_slice()).unwrap(), pca);
    }
}
