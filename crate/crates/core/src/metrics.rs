//! Evaluation metrics. OOD is the positive class throughout and the
//! uncertainty is the score, so perfect separation gives 1.0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::special::chi2_quantile;

pub const DEFAULT_BINS: usize = 15;
pub const NLL_FLOOR: f64 = 1e-12;
pub const QQ_TOL: f64 = 1e-10;

pub fn accuracy(preds: &[usize], labels: &[usize]) -> Result<f64, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(preds.len(), labels.len()));
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Index of the right-closed bin `((b)/B, (b+1)/B]` holding `value`; 0 and
/// anything below land in the first bin, anything above 1 in the last.
pub fn bin_index(value: f64, num_bins: usize) -> usize {
    let b = num_bins as f64;
    let mut idx = ((value * b).ceil() as isize - 1).clamp(0, num_bins as isize - 1) as usize;
    // Guard against `value * b` rounding just above an exact edge.
    if idx > 0 && value <= idx as f64 / b {
        idx -= 1;
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    /// Mean confidence of the members, 0 for an empty bin.
    pub confidence_mean: f64,
    /// Fraction correct among the members, 0 for an empty bin.
    pub accuracy: f64,
    pub count: usize,
}

pub fn calibration_curve(
    confidences: &[f64],
    correct: &[bool],
    num_bins: usize,
) -> Result<Vec<CalibrationBin>, MetricsError> {
    if confidences.len() != correct.len() {
        return Err(MetricsError::LengthMismatch(confidences.len(), correct.len()));
    }
    if confidences.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if num_bins == 0 {
        return Err(MetricsError::Invalid("num_bins must be at least 1".into()));
    }
    let mut sum_conf = vec![0.0; num_bins];
    let mut hits = vec![0usize; num_bins];
    let mut count = vec![0usize; num_bins];
    for (&c, &ok) in confidences.iter().zip(correct) {
        if !c.is_finite() {
            return Err(MetricsError::Invalid(format!("non-finite confidence {c}")));
        }
        let b = bin_index(c, num_bins);
        sum_conf[b] += c;
        hits[b] += ok as usize;
        count[b] += 1;
    }
    Ok((0..num_bins)
        .map(|b| {
            let n = count[b];
            let (confidence_mean, accuracy) = if n == 0 {
                (0.0, 0.0)
            } else {
                (sum_conf[b] / n as f64, hits[b] as f64 / n as f64)
            };
            CalibrationBin {
                lower: b as f64 / num_bins as f64,
                upper: (b + 1) as f64 / num_bins as f64,
                confidence_mean,
                accuracy,
                count: n,
            }
        })
        .collect())
}

pub fn ece(confidences: &[f64], correct: &[bool], num_bins: usize) -> Result<f64, MetricsError> {
    let bins = calibration_curve(confidences, correct, num_bins)?;
    let n = confidences.len() as f64;
    Ok(bins
        .iter()
        .map(|b| b.count as f64 / n * (b.accuracy - b.confidence_mean).abs())
        .sum())
}

/// `−mean(ln p)` with `p` clamped to at least [`NLL_FLOOR`].
pub fn nll(prob_of_true_class: &[f64]) -> Result<f64, MetricsError> {
    if prob_of_true_class.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut clamped = 0usize;
    let mut sum = 0.0;
    for &p in prob_of_true_class {
        if p.is_nan() {
            return Err(MetricsError::Invalid("NaN probability".into()));
        }
        let q = if p < NLL_FLOOR {
            clamped += 1;
            NLL_FLOOR
        } else {
            p
        };
        sum -= q.ln();
    }
    if clamped > 0 {
        log::info!("nll: clamped {clamped} probabilities to {NLL_FLOOR:e}");
    }
    Ok(sum / prob_of_true_class.len() as f64)
}

fn check_scores(id: &[f64], ood: &[f64]) -> Result<(), MetricsError> {
    if ood.is_empty() {
        return Err(MetricsError::NoOodSamples);
    }
    if id.is_empty() {
        return Err(MetricsError::NoIdSamples);
    }
    if id.iter().chain(ood).any(|v| v.is_nan()) {
        return Err(MetricsError::Invalid("NaN score".into()));
    }
    Ok(())
}

/// Mann–Whitney AUROC by rank sum with midranks.
///
/// Twice the rank sum is an integer, so the result is bit-identical to
/// the pairwise count `(wins + ties/2) / (n m)`.
pub fn auroc(id: &[f64], ood: &[f64]) -> Result<f64, MetricsError> {
    check_scores(id, ood)?;
    let mut all: Vec<(f64, bool)> = id
        .iter()
        .map(|&s| (s, false))
        .chain(ood.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Ranks are 1-based; a tie group spanning ranks lo..=hi has midrank
    // (lo + hi) / 2, so each OOD member adds lo + hi to twice the sum.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let positives = all[i..=j].iter().filter(|e| e.1).count() as u128;
        twice_rank_sum += positives * ((i + 1) + (j + 1)) as u128;
        i = j + 1;
    }
    let (n, m) = (id.len() as u128, ood.len() as u128);
    let twice_u = twice_rank_sum - m * (m + 1);
    Ok(twice_u as f64 / (2 * n * m) as f64)
}

/// Exhaustive `O(n m)` AUROC; the reference the rank-sum form must match.
pub fn auroc_pairwise(id: &[f64], ood: &[f64]) -> Result<f64, MetricsError> {
    check_scores(id, ood)?;
    let mut twice: u128 = 0;
    for &o in ood {
        for &d in id {
            if o > d {
                twice += 2;
            } else if o == d {
                twice += 1;
            }
        }
    }
    Ok(twice as f64 / (2 * id.len() as u128 * ood.len() as u128) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Precision/recall after each descending threshold; tied scores enter
/// together.
pub fn pr_curve(id: &[f64], ood: &[f64]) -> Result<Vec<PrPoint>, MetricsError> {
    check_scores(id, ood)?;
    let mut all: Vec<(f64, bool)> = id
        .iter()
        .map(|&s| (s, false))
        .chain(ood.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let m = ood.len() as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            if all[j].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push(PrPoint {
            threshold: all[i].0,
            recall: tp as f64 / m,
            precision: tp as f64 / (tp + fp) as f64,
        });
        i = j;
    }
    Ok(points)
}

/// Step-wise average precision: `Σ (R_i − R_{i−1}) P_i`.
pub fn aupr(id: &[f64], ood: &[f64]) -> Result<f64, MetricsError> {
    let mut prev = 0.0;
    let mut area = 0.0;
    for p in pr_curve(id, ood)? {
        area += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    Ok(area)
}

/// Smallest step-wise AUPR any ranking of `n` ID and `m` OOD scores can
/// produce: every OOD sample ranked below every ID sample.
pub fn aupr_lower_bound(n: usize, m: usize) -> f64 {
    (1..=m).map(|j| j as f64 / (n + j) as f64).sum::<f64>() / m as f64
}

/// Counts over equal-width right-closed bins on `[0, 1]`.
pub fn uncertainty_histogram(uncertainties: &[f64], num_bins: usize) -> Result<Vec<usize>, MetricsError> {
    if num_bins == 0 {
        return Err(MetricsError::Invalid("num_bins must be at least 1".into()));
    }
    let mut counts = vec![0; num_bins];
    for &u in uncertainties {
        if u.is_nan() {
            return Err(MetricsError::Invalid("NaN uncertainty".into()));
        }
        counts[bin_index(u, num_bins)] += 1;
    }
    Ok(counts)
}

/// χ² quantiles at the plotting positions `(r − 0.5)/n`, `r = 1..=n`.
pub fn chi2_quantile_grid(n: usize, dof: usize) -> Vec<f64> {
    (1..=n)
        .map(|r| chi2_quantile((r as f64 - 0.5) / n as f64, dof, QQ_TOL))
        .collect()
}

/// Mean absolute gap between sorted `md²` and the χ²_dof quantile grid.
pub fn qq_error(md_squared: &[f64], dof: usize) -> Result<f64, MetricsError> {
    if md_squared.len() < 10 {
        return Err(MetricsError::Invalid(format!(
            "qq_error needs at least 10 samples, got {}",
            md_squared.len()
        )));
    }
    if dof == 0 {
        return Err(MetricsError::Invalid("dof must be positive".into()));
    }
    qq_error_against(md_squared, &chi2_quantile_grid(md_squared.len(), dof))
}

/// [`qq_error`] against a precomputed grid.
pub fn qq_error_against(md_squared: &[f64], grid: &[f64]) -> Result<f64, MetricsError> {
    if md_squared.len() != grid.len() {
        return Err(MetricsError::LengthMismatch(md_squared.len(), grid.len()));
    }
    if md_squared.iter().any(|v| v.is_nan()) {
        return Err(MetricsError::Invalid("NaN md²".into()));
    }
    let mut sorted = md_squared.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().zip(grid).map(|(o, t)| (o - t).abs()).sum();
    Ok(total / sorted.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodReport {
    pub name: String,
    pub samples: usize,
    pub auroc: f64,
    pub aupr: f64,
    pub uncertainty_histogram: Vec<usize>,
    pub pr_curve: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Always `"positive=ood, score=uncertainty"`.
    pub orientation: String,
    pub test_samples: usize,
    pub num_pseudo_classes: usize,
    /// Retained principal components `d′`.
    pub num_eigen: usize,
    pub distance_mode: String,
    pub accuracy_softmax: f64,
    pub accuracy_md: f64,
    pub ece: f64,
    pub nll: f64,
    pub qq_error: f64,
    pub calibration_bins: Vec<CalibrationBin>,
    pub id_uncertainty_histogram: Vec<usize>,
    pub ood: Vec<OodReport>,
    pub latency_ms_per_sample: f64,
}

pub const ORIENTATION: &str = "positive=ood, score=uncertainty";

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        serde_json::from_str(text).map_err(|e| MetricsError::Invalid(e.to_string()))
    }

    /// Copy with the latency zeroed, for determinism comparisons.
    pub fn without_latency(&self) -> Self {
        EvalReport {
            latency_ms_per_sample: 0.0,
            ..self.clone()
        }
    }

    pub fn calibration_csv(&self) -> String {
        let mut s = String::from("bin,lower,upper,confidence_mean,accuracy,count\n");
        for (i, b) in self.calibration_bins.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{}",
                b.lower, b.upper, b.confidence_mean, b.accuracy, b.count
            );
        }
        s
    }

    /// One row per bin: the ID counts, then one column per OOD set.
    pub fn histogram_csv(&self) -> String {
        let bins = self.id_uncertainty_histogram.len();
        let mut s = String::from("bin,lower,upper,id");
        for o in &self.ood {
            let _ = write!(s, ",{}", o.name);
        }
        s.push('\n');
        for b in 0..bins {
            let _ = write!(
                s,
                "{b},{},{},{}",
                b as f64 / bins as f64,
                (b + 1) as f64 / bins as f64,
                self.id_uncertainty_histogram[b]
            );
            for o in &self.ood {
                let _ = write!(s, ",{}", o.uncertainty_histogram.get(b).copied().unwrap_or(0));
            }
            s.push('\n');
        }
        s
    }

    pub fn pr_csv(ood: &OodReport) -> String {
        let mut s = String::from("threshold,recall,precision\n");
        for p in &ood.pr_curve {
            let _ = writeln!(s, "{},{},{}", p.threshold, p.recall, p.precision);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 2, 3], &[0, 1, 2, 0]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn bin_edges_are_right_closed() {
        assert_eq!(bin_index(0.0, 15), 0);
        assert_eq!(bin_index(1.0, 15), 14);
        assert_eq!(bin_index(0.8, 15), 11);
        assert_eq!(bin_index(0.5, 2), 0);
        assert_eq!(bin_index(0.5000001, 2), 1);
        assert_eq!(bin_index(0.3, 1), 0);
        for b in 1..=15 {
            let edge = b as f64 / 15.0;
            assert_eq!(bin_index(edge, 15), b - 1, "edge {edge}");
        }
    }

    #[test]
    fn ece_cases() {
        assert_eq!(ece(&[1.0; 5], &[true; 5], 15).unwrap(), 0.0);
        let e = ece(&[0.95; 4], &[true, true, false, false], 15).unwrap();
        assert!((e - 0.45).abs() < 1e-12);
        let mut conf = vec![0.8; 10];
        conf.extend([0.6; 10]);
        let mut ok = vec![true; 8];
        ok.extend([false; 2]);
        ok.extend([true; 6]);
        ok.extend([false; 4]);
        assert!(ece(&conf, &ok, 15).unwrap().abs() < 1e-12);
        assert!(ece(&[], &[], 15).is_err());
        assert!(ece(&[0.5], &[true], 0).is_err());
    }

    #[test]
    fn nll_cases() {
        assert_eq!(nll(&[1.0, 1.0]).unwrap(), 0.0);
        let inv_e = (-1.0f64).exp();
        assert!((nll(&[inv_e; 3]).unwrap() - 1.0).abs() < 1e-12);
        let v = nll(&[0.5, 0.25]).unwrap();
        assert!((v - (2f64.ln() + 4f64.ln()) / 2.0).abs() < 1e-12);
        assert!((nll(&[0.0]).unwrap() + NLL_FLOOR.ln()).abs() < 1e-12);
    }

    #[test]
    fn auroc_cases() {
        assert_eq!(auroc(&[0.1, 0.2], &[0.5, 0.9]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.1, 0.4], &[0.3, 0.9]).unwrap(), 0.75);
        assert_eq!(auroc(&[0.5; 3], &[0.5; 4]).unwrap(), 0.5);
        assert!(matches!(auroc(&[0.1], &[]), Err(MetricsError::NoOodSamples)));
        assert!(matches!(auroc(&[], &[0.1]), Err(MetricsError::NoIdSamples)));
    }

    #[test]
    fn aupr_cases() {
        assert_eq!(aupr(&[0.1, 0.2], &[0.5, 0.9]).unwrap(), 1.0);
        let v = aupr(&[0.1, 0.4], &[0.3, 0.9]).unwrap();
        assert!((v - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert!(matches!(aupr(&[0.1], &[]), Err(MetricsError::NoOodSamples)));
    }

    #[test]
    fn aupr_can_fall_below_prevalence() {
        // Worst ranking with n=1, m=2: AP = (1/2 + 2/3)/2 < 2/3.
        let v = aupr(&[0.9], &[0.1, 0.2]).unwrap();
        assert!((v - 7.0 / 12.0).abs() < 1e-12);
        assert!(v < 2.0 / 3.0);
        assert!((aupr_lower_bound(1, 2) - v).abs() < 1e-12);
    }

    #[test]
    fn histogram_cases() {
        let h = uncertainty_histogram(&[0.999, 1.0, 0.9999], 10).unwrap();
        assert_eq!(h[9], 3);
        let h = uncertainty_histogram(&[0.0, 0.05, 0.5, 0.95], 4).unwrap();
        assert_eq!(h.iter().sum::<usize>(), 4);
        assert_eq!(h, vec![2, 1, 0, 1]);
    }

    #[test]
    fn qq_self_consistency_and_shift() {
        let grid = chi2_quantile_grid(200, 5);
        assert!(qq_error(&grid, 5).unwrap() < 1e-8);
        let shifted: Vec<f64> = grid.iter().map(|v| v + 2.0).collect();
        assert!((qq_error(&shifted, 5).unwrap() - 2.0).abs() < 1e-8);
        assert!(qq_error(&grid[..5], 5).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = EvalReport {
            orientation: ORIENTATION.into(),
            test_samples: 4,
            num_pseudo_classes: 3,
            num_eigen: 2,
            distance_mode: "mahalanobis".into(),
            accuracy_softmax: 1.0,
            accuracy_md: 0.75,
            ece: 0.1,
            nll: 0.5,
            qq_error: 0.2,
            calibration_bins: calibration_curve(&[0.2, 0.9], &[false, true], 2).unwrap(),
            id_uncertainty_histogram: vec![1, 1],
            ood: vec![OodReport {
                name: "far".into(),
                samples: 2,
                auroc: 1.0,
                aupr: 1.0,
                uncertainty_histogram: vec![0, 2],
                pr_curve: pr_curve(&[0.1], &[0.9, 0.95]).unwrap(),
            }],
            latency_ms_per_sample: 0.01,
        };
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
        assert!(r.histogram_csv().starts_with("bin,lower,upper,id,far\n"));
        assert_eq!(r.calibration_csv().lines().count(), 3);
    }
}
