//! Standardized PCA plus a shared-covariance Gaussian head on fixed
//! features: distances, chi-square confidence and OOD scores, without any
//! network.
//!
//!     cargo run --example mahalanobis_ood

use maple::linalg::Matrix;
use maple::mahal::{fit_pca, predict, DistanceMode, GaussianHead};
use maple::metrics::{aupr, auroc};
use maple::relabel::LabelMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sample(rng: &mut ChaCha8Rng, mean: &[f64], scale: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            mean.iter()
                .zip(scale)
                .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // Two classes in 6-D; the last three coordinates are small noise.
    let scale = [1.0, 1.0, 1.0, 0.05, 0.05, 0.05];
    let mut rows = sample(&mut rng, &[0.0; 6], &scale, 300);
    rows.extend(sample(&mut rng, &[6.0, 0.0, 0.0, 0.0, 0.0, 0.0], &scale, 300));
    let labels: Vec<usize> = (0..600).map(|i| i / 300).collect();
    let train = Matrix::from_rows(&rows);

    let pca = fit_pca(&train, 0.95)?;
    println!(
        "PCA keeps d' = {} of {} dims ({:.1}% of variance)",
        pca.output_dim(),
        pca.input_dim(),
        100.0 * pca.explained_fraction
    );
    let z = pca.transform_batch(&train)?;
    let head = GaussianHead::fit(&z, &labels, LabelMap::identity(2))?;

    let id_test = sample(&mut rng, &[6.0, 0.0, 0.0, 0.0, 0.0, 0.0], &scale, 200);
    let ood_test = sample(&mut rng, &[3.0, 8.0, 0.0, 0.0, 0.0, 0.0], &scale, 200);
    let score = |rows: &[Vec<f64>]| -> Result<Vec<f64>, maple::Error> {
        rows.iter()
            .map(|r| Ok(predict(&pca, &head, r, None, DistanceMode::Mahalanobis)?.uncertainty))
            .collect()
    };
    let (u_id, u_ood) = (score(&id_test)?, score(&ood_test)?);

    let p = predict(&pca, &head, &id_test[0], None, DistanceMode::Mahalanobis)?;
    println!(
        "one ID sample: class {} md {:.3} p_md {:.3} uncertainty {:.3}",
        p.original_class,
        p.min_distance(),
        p.p_md,
        p.uncertainty
    );
    println!("AUROC {:.4}  AUPR {:.4}", auroc(&u_id, &u_ood)?, aupr(&u_id, &u_ood)?);
    Ok(())
}
