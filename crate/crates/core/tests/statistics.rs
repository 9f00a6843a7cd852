use maple::cluster::{bic, kmeans, ClusterModel};
use maple::linalg::Matrix;
use maple::metrics::{chi2_quantile_grid, qq_error, qq_error_against, uncertainty_histogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal};

fn chi2_samples(n: usize, dof: usize, seed: u64) -> Vec<f64> {
    let dist = ChiSquared::new(dof as f64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(dist)).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn qq_error_shrinks_with_sample_size() {
    let medians: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| {
            let grid = chi2_quantile_grid(n, 5);
            median((0..20).map(|s| qq_error_against(&chi2_samples(n, 5, s), &grid).unwrap()).collect())
        })
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn qq_error_of_genuine_samples_below_monte_carlo_bound() {
    let n = 10_000;
    let grid = chi2_quantile_grid(n, 5);
    let mut reps: Vec<f64> = (0..100)
        .map(|s| qq_error_against(&chi2_samples(n, 5, 1000 + s), &grid).unwrap())
        .collect();
    reps.sort_by(f64::total_cmp);
    let bound = reps[98];
    let fresh = qq_error_against(&chi2_samples(n, 5, 7), &grid).unwrap();
    assert!(fresh < bound, "fresh {fresh} bound {bound}");
    // A wrong dof sits far outside the sampling noise.
    let wrong = qq_error(&chi2_samples(n, 7, 7), 5).unwrap();
    assert!(wrong > 10.0 * bound, "wrong-dof error {wrong} bound {bound}");
}

#[test]
fn uniform_scores_fill_bins_within_three_sigma() {
    let n = 10_000;
    let bins = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let counts = uncertainty_histogram(&u, bins).unwrap();
    assert_eq!(counts.iter().sum::<usize>(), n);
    let p = 1.0 / bins as f64;
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for (b, &c) in counts.iter().enumerate() {
        assert!((c as f64 - mean).abs() <= 3.0 * sd, "bin {b}: {c}");
    }
}

/// The spherical shared-variance BIC written out independently.
fn bic_oracle(points: &Matrix, assignments: &[usize], k: usize) -> f64 {
    let (m, d) = (points.rows(), points.cols());
    let mut sums = vec![vec![0.0; d]; k];
    let mut sizes = vec![0usize; k];
    for (row, &a) in points.row_iter().zip(assignments) {
        sizes[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(row) {
            *s += x;
        }
    }
    let mut inertia = 0.0;
    for (row, &a) in points.row_iter().zip(assignments) {
        for (j, x) in row.iter().enumerate() {
            let c = sums[a][j] / sizes[a] as f64;
            inertia += (x - c) * (x - c);
        }
    }
    let (mf, df) = (m as f64, d as f64);
    let var = inertia / (df * (m - k) as f64);
    let mix: f64 = sizes.iter().map(|&s| s as f64 * (s as f64 / mf).ln()).sum();
    let ll = mix - 0.5 * mf * df * (2.0 * std::f64::consts::PI * var).ln() - inertia / (2.0 * var);
    ll - 0.5 * (k * (d + 1)) as f64 * mf.ln()
}

fn gaussian(m: usize, d: usize, seed: u64, shift: &[f64]) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..m)
        .flat_map(|_| (0..d).map(|j| shift.get(j).copied().unwrap_or(0.0) + rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>())
        .collect();
    Matrix::from_vec(m, d, data)
}

fn one_cluster(x: &Matrix) -> ClusterModel {
    kmeans(x, 1, 0, 10).unwrap()
}

#[test]
fn bic_matches_independent_formula() {
    for seed in 0..5 {
        let x = gaussian(200, 3, seed, &[]);
        for k in 1..4 {
            let model = kmeans(&x, k, seed, 100).unwrap();
            let want = bic_oracle(&x, &model.assignments, k);
            let got = bic(&x, &model).unwrap();
            assert!((got - want).abs() < 1e-8 * want.abs(), "k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn single_gaussian_prefers_one_cluster() {
    let wins = (0..20)
        .filter(|&s| {
            let x = gaussian(500, 2, s, &[]);
            bic(&x, &one_cluster(&x)).unwrap() > bic(&x, &kmeans(&x, 2, s, 100).unwrap()).unwrap()
        })
        .count();
    assert!(wins >= 19, "{wins}/20");
}

#[test]
fn separated_pair_prefers_two_clusters() {
    let mut data = gaussian(150, 2, 1, &[]).into_vec();
    data.extend(gaussian(150, 2, 2, &[20.0, 0.0]).into_vec());
    let x = Matrix::from_vec(300, 2, data);
    assert!(bic(&x, &kmeans(&x, 2, 0, 100).unwrap()).unwrap() > bic(&x, &one_cluster(&x)).unwrap());
}

#[test]
fn duplicating_points_moves_bic_as_the_formula_predicts() {
    let x = gaussian(120, 2, 4, &[]);
    let model = kmeans(&x, 3, 4, 100).unwrap();
    let mut doubled = x.clone().into_vec();
    doubled.extend(x.as_slice());
    let x2 = Matrix::from_vec(240, 2, doubled);
    let mut assignments = model.assignments.clone();
    assignments.extend(&model.assignments);
    let model2 = ClusterModel {
        centroids: model.centroids.clone(),
        assignments: assignments.clone(),
        inertia: 2.0 * model.inertia,
        iterations: 0,
    };
    let (b1, b2) = (bic(&x, &model).unwrap(), bic(&x2, &model2).unwrap());
    // Mixture weights are unchanged, so the mixing term doubles; the
    // Gaussian terms follow the new variance estimate; the penalty grows by
    // K (d + 1) / 2 · ln 2.
    let (m, d, k, inertia) = (120.0, 2.0, 3.0, model.inertia);
    let v1 = inertia / (d * (m - k));
    let v2 = 2.0 * inertia / (d * (2.0 * m - k));
    let mix: f64 = model.sizes().iter().map(|&s| s as f64 * (s as f64 / m).ln()).sum();
    let gauss = |mm: f64, v: f64, i: f64| -0.5 * mm * d * (2.0 * std::f64::consts::PI * v).ln() - i / (2.0 * v);
    let predicted = b1 + mix + gauss(2.0 * m, v2, 2.0 * inertia) - gauss(m, v1, inertia)
        - 0.5 * k * (d + 1.0) * 2f64.ln();
    assert!((b2 - predicted).abs() < 1e-9 * b2.abs(), "{b2} vs {predicted}");
    assert!((b2 - bic_oracle(&x2, &assignments, 3)).abs() < 1e-8 * b2.abs());
}
