//! K-Means and X-Means with a spherical shared-variance BIC.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ClusterError;
use crate::linalg::{sq_dist, symmetric_eigen, Matrix};
use crate::rng;

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Lloyd iterations actually run.
    pub iterations: usize,
}

impl ClusterModel {
    pub fn num_clusters(&self) -> usize {
        self.centroids.rows()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.num_clusters()];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.row_iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn means(points: &Matrix, assignments: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let d = points.cols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (p, &a) in points.row_iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums.row_mut(a).iter_mut().zip(p) {
            *s += x;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            sums.row_mut(j).iter_mut().for_each(|s| *s /= c as f64);
        }
    }
    (sums, counts)
}

fn inertia_of(points: &Matrix, centroids: &Matrix, assignments: &[usize]) -> f64 {
    points
        .row_iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, centroids.row(a)))
        .sum()
}

/// Mean update with empty-cluster repair: an empty cluster takes the point
/// farthest from its centroid among clusters that can spare one.
fn update_centroids(points: &Matrix, assignments: &mut [usize], k: usize) -> Matrix {
    let (mut centroids, mut counts) = means(points, assignments, k);
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let far = (0..points.rows())
            .filter(|&i| counts[assignments[i]] > 1)
            .map(|i| (i, sq_dist(points.row(i), centroids.row(assignments[i]))))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        let Some((i, _)) = far else { break };
        assignments[i] = empty;
        (centroids, counts) = means(points, assignments, k);
    }
    centroids
}

/// Lloyd iterations from the given centroids until the assignment stops
/// changing or `max_iter` is reached. Returns the final model and the
/// inertia after every update and assignment step.
pub fn lloyd(points: &Matrix, init: Matrix, max_iter: usize) -> (ClusterModel, Vec<f64>) {
    let k = init.rows();
    let mut assignments: Vec<usize> = points.row_iter().map(|p| nearest(p, &init).0).collect();
    let mut trace = vec![inertia_of(points, &init, &assignments)];
    let mut iterations = 0;
    let mut centroids = init;
    while iterations < max_iter {
        iterations += 1;
        centroids = update_centroids(points, &mut assignments, k);
        trace.push(inertia_of(points, &centroids, &assignments));
        let next: Vec<usize> = points.row_iter().map(|p| nearest(p, &centroids).0).collect();
        if next == assignments {
            break;
        }
        assignments = next;
        trace.push(inertia_of(points, &centroids, &assignments));
    }
    if iterations == max_iter || iterations == 0 {
        centroids = update_centroids(points, &mut assignments, k);
    }
    let inertia = inertia_of(points, &centroids, &assignments);
    (
        ClusterModel {
            centroids,
            assignments,
            inertia,
            iterations,
        },
        trace,
    )
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
pub fn kmeans_pp_init<R: Rng>(points: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let m = points.rows();
    let mut chosen = vec![rng.random_range(0..m)];
    let mut d2: Vec<f64> = points
        .row_iter()
        .map(|p| sq_dist(p, points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            // Float drift can leave `pick` on a zero-weight point.
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            (0..m).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (w, p) in d2.iter_mut().zip(points.row_iter()) {
            *w = w.min(sq_dist(p, points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

/// k-means++ seeded Lloyd clustering.
pub fn kmeans(
    points: &Matrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel, ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidK(0));
    }
    if points.rows() < k {
        return Err(ClusterError::TooFewPoints {
            needed: k,
            got: points.rows(),
        });
    }
    let mut rng = rng::stream(seed, &[rng::TAG_CLUSTER]);
    let init = kmeans_pp_init(points, k, &mut rng);
    Ok(lloyd(points, init, max_iter).0)
}

/// Bayesian Information Criterion of a hard clustering under a spherical
/// Gaussian mixture with one shared variance. Larger is better.
///
/// With `M` points in `d` dimensions, `K` clusters of sizes `M_j` and
/// `σ̂² = inertia / (d (M − K))`:
///
/// ```text
/// L̂   = Σ_j M_j ln(M_j / M) − (M d / 2) ln(2π σ̂²) − inertia / (2 σ̂²)
/// BIC = L̂ − (K (d + 1) / 2) ln M
/// ```
pub fn bic(points: &Matrix, model: &ClusterModel) -> Result<f64, ClusterError> {
    let m = points.rows();
    let k = model.num_clusters();
    let d = points.cols() as f64;
    if m <= k {
        return Err(ClusterError::TooFewPoints {
            needed: k + 1,
            got: m,
        });
    }
    let variance = model.inertia / (d * (m - k) as f64);
    if !(variance > 0.0) {
        return Err(ClusterError::DegenerateVariance);
    }
    let mf = m as f64;
    let prior: f64 = model
        .sizes()
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| s as f64 * (s as f64 / mf).ln())
        .sum();
    let loglik = prior
        - 0.5 * mf * d * (2.0 * std::f64::consts::PI * variance).ln()
        - model.inertia / (2.0 * variance);
    let params = k as f64 * (d + 1.0);
    Ok(loglik - 0.5 * params * mf.ln())
}

fn single_cluster(points: &Matrix) -> ClusterModel {
    let assignments = vec![0; points.rows()];
    let (centroids, _) = means(points, &assignments, 1);
    let inertia = inertia_of(points, &centroids, &assignments);
    ClusterModel {
        centroids,
        assignments,
        inertia,
        iterations: 0,
    }
}

/// Proposes a 2-way split of `members`: children start at the centroid
/// ± one standard deviation along the principal axis, then run Lloyd.
/// The axis sign is fixed so the first member projects nonnegatively.
fn propose_split(members: &Matrix, seed: u64) -> Option<ClusterModel> {
    let parent = single_cluster(members);
    let mu = parent.centroids.row(0).to_vec();
    let d = members.cols();
    let m = members.rows() as f64;
    let mut cov = Matrix::zeros(d, d);
    for p in members.row_iter() {
        for a in 0..d {
            let da = p[a] - mu[a];
            for b in a..d {
                cov[(a, b)] += da * (p[b] - mu[b]) / m;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    let eig = symmetric_eigen(&cov);
    let lambda = eig.values[0].max(0.0);
    if lambda == 0.0 {
        return None;
    }
    let mut axis = eig.vectors.column(0);
    let first: f64 = members
        .row(0)
        .iter()
        .zip(&mu)
        .zip(&axis)
        .map(|((x, c), v)| (x - c) * v)
        .sum();
    if first < 0.0 {
        axis.iter_mut().for_each(|v| *v = -*v);
    }
    let step = lambda.sqrt();
    let mut init = Matrix::zeros(2, d);
    for k in 0..d {
        init[(0, k)] = mu[k] + step * axis[k];
        init[(1, k)] = mu[k] - step * axis[k];
    }
    let (children, _) = lloyd(members, init, DEFAULT_MAX_ITER);
    if children.sizes().contains(&0) {
        // Principal-axis start collapsed; fall back to seeded k-means++.
        return kmeans(members, 2, seed, DEFAULT_MAX_ITER).ok();
    }
    Some(children)
}

/// Whether the two-child model beats the parent on the members' local BIC.
fn split_wins(members: &Matrix, children: &ClusterModel) -> bool {
    let parent = single_cluster(members);
    match (bic(members, &parent), bic(members, children)) {
        (Ok(p), Ok(c)) => c > p,
        // Children collapse onto exact points while the parent has spread.
        (Ok(_), Err(ClusterError::DegenerateVariance)) => true,
        _ => false,
    }
}

/// X-Means: start from one cluster and, each round, try to split every
/// cluster in two, keeping a split when the children's local BIC beats the
/// parent's. Stops when a round accepts no split or when accepting the
/// round would take the count past `max_clusters`, in which case the round
/// is discarded. Finishes with a global Lloyd pass.
pub fn xmeans(points: &Matrix, max_clusters: usize, seed: u64) -> Result<ClusterModel, ClusterError> {
    if points.rows() < 2 {
        return Err(ClusterError::TooFewPoints {
            needed: 2,
            got: points.rows(),
        });
    }
    if max_clusters == 0 {
        return Err(ClusterError::InvalidK(0));
    }
    // Each entry holds the indices of one current cluster.
    let mut clusters: Vec<Vec<usize>> = vec![(0..points.rows()).collect()];
    let mut round = 0u64;
    while clusters.len() < max_clusters {
        round += 1;
        let mut next: Vec<Vec<usize>> = Vec::with_capacity(clusters.len() * 2);
        let mut accepted = 0;
        for (ci, members) in clusters.iter().enumerate() {
            if members.len() < 3 {
                next.push(members.clone());
                continue;
            }
            let sub = points.select_rows(members);
            let split_seed = rng::derive(seed, &[round, ci as u64]);
            match propose_split(&sub, split_seed) {
                Some(children) if split_wins(&sub, &children) => {
                    let mut left = Vec::new();
                    let mut right = Vec::new();
                    for (&idx, &a) in members.iter().zip(&children.assignments) {
                        if a == 0 {
                            left.push(idx);
                        } else {
                            right.push(idx);
                        }
                    }
                    next.push(left);
                    next.push(right);
                    accepted += 1;
                }
                _ => next.push(members.clone()),
            }
        }
        if accepted == 0 || next.len() > max_clusters {
            break;
        }
        clusters = next;
    }
    let mut assignments = vec![0usize; points.rows()];
    for (ci, members) in clusters.iter().enumerate() {
        for &i in members {
            assignments[i] = ci;
        }
    }
    let (init, _) = means(points, &assignments, clusters.len());
    Ok(lloyd(points, init, DEFAULT_MAX_ITER).0)
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.iter().flatten().map(|&v| c2(v)).sum();
    let sum_a: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let total = c2(n as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (sum_cells - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    pub(crate) fn blobs(centres: &[&[f64]], per: usize, std: f64, seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = centres[0].len();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (c, centre) in centres.iter().enumerate() {
            for _ in 0..per {
                for &mu in centre.iter() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data.push(mu + std * z);
                }
                labels.push(c);
            }
        }
        (Matrix::from_vec(labels.len(), d, data), labels)
    }

    #[test]
    fn k1_is_mean_with_total_scatter() {
        let (pts, _) = blobs(&[&[1.0, 2.0]], 50, 1.0, 3);
        let m = kmeans(&pts, 1, 0, 100).unwrap();
        let mean = [
            pts.column(0).iter().sum::<f64>() / 50.0,
            pts.column(1).iter().sum::<f64>() / 50.0,
        ];
        assert!(sq_dist(m.centroids.row(0), &mean) < 1e-24);
        let scatter: f64 = pts.row_iter().map(|p| sq_dist(p, &mean)).sum();
        assert!((m.inertia - scatter).abs() < 1e-9 * scatter);
    }

    #[test]
    fn two_points_two_clusters() {
        let pts = Matrix::from_rows(&[[0.0, 0.0], [5.0, 1.0]]);
        let m = kmeans(&pts, 2, 4, 100).unwrap();
        assert_eq!(m.inertia, 0.0);
        assert_ne!(m.assignments[0], m.assignments[1]);
        assert!(matches!(
            kmeans(&pts, 3, 0, 10),
            Err(ClusterError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn three_separated_blobs_recovered() {
        let (pts, truth) = blobs(&[&[0.0, 0.0], &[20.0, 0.0], &[0.0, 20.0]], 60, 0.5, 8);
        for seed in 0..5 {
            let m = kmeans(&pts, 3, seed, 100).unwrap();
            assert_eq!(adjusted_rand_index(&m.assignments, &truth), 1.0);
        }
    }

    #[test]
    fn lloyd_inertia_non_increasing() {
        let (pts, _) = blobs(&[&[0.0, 0.0], &[3.0, 0.0], &[1.5, 2.0]], 40, 1.0, 5);
        let mut rng = rng::stream(1, &[]);
        let init = kmeans_pp_init(&pts, 4, &mut rng);
        let (_, trace) = lloyd(&pts, init, 100);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{trace:?}");
        }
    }

    #[test]
    fn bic_prefers_two_for_separated_blobs() {
        let (pts, _) = blobs(&[&[0.0, 0.0], &[20.0, 0.0]], 100, 1.0, 2);
        let one = kmeans(&pts, 1, 0, 100).unwrap();
        let two = kmeans(&pts, 2, 0, 100).unwrap();
        assert!(bic(&pts, &two).unwrap() > bic(&pts, &one).unwrap());
    }

    #[test]
    fn bic_degenerate_variance() {
        let pts = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [3.0, 3.0]]);
        let m = kmeans(&pts, 2, 0, 10).unwrap();
        assert!(matches!(bic(&pts, &m), Err(ClusterError::DegenerateVariance)));
    }

    #[test]
    fn ari_is_label_permutation_invariant() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }

    #[test]
    fn xmeans_cap_binds() {
        let (pts, _) = blobs(&[&[0.0, 0.0], &[20.0, 0.0], &[0.0, 20.0]], 100, 1.0, 6);
        assert_eq!(xmeans(&pts, 2, 0).unwrap().num_clusters(), 2);
        assert_eq!(xmeans(&pts, 1, 0).unwrap().num_clusters(), 1);
        assert_eq!(xmeans(&pts, 5, 0).unwrap().num_clusters(), 3);
    }
}
