//! Calibration and OOD metrics on hand-made scores: a reliability table,
//! ECE, NLL, AUROC/AUPR and the chi-square QQ error.
//!
//!     cargo run --example calibration_metrics

use maple::metrics::{aupr, auroc, calibration_curve, ece, nll, qq_error};
use maple::special::{chi2_cdf, chi2_quantile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::ChiSquared;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    // An overconfident classifier: says 0.9 but is right 70% of the time.
    let conf: Vec<f64> = (0..1000).map(|_| rng.random_range(0.85..0.95)).collect();
    let correct: Vec<bool> = (0..1000).map(|_| rng.random::<f64>() < 0.7).collect();
    for b in calibration_curve(&conf, &correct, 10)?.iter().filter(|b| b.count > 0) {
        println!(
            "bin ({:.1}, {:.1}]: n={:<4} confidence {:.3} accuracy {:.3}",
            b.lower, b.upper, b.count, b.confidence_mean, b.accuracy
        );
    }
    println!("ECE {:.4}", ece(&conf, &correct, 15)?);
    let p_true: Vec<f64> = conf.iter().zip(&correct).map(|(&c, &ok)| if ok { c } else { 1.0 - c }).collect();
    println!("NLL {:.4}", nll(&p_true)?);

    let id = [0.1, 0.4, 0.2, 0.15];
    let ood = [0.3, 0.9, 0.8];
    println!("AUROC {:.4}  AUPR {:.4}", auroc(&id, &ood)?, aupr(&id, &ood)?);

    // MD² of well-fitted Gaussian features follows chi-square with d' dof.
    let dist = ChiSquared::new(4.0)?;
    let md2: Vec<f64> = (0..5000).map(|_| rng.sample(dist)).collect();
    println!("QQ error, right dof: {:.4}", qq_error(&md2, 4)?);
    println!("QQ error, wrong dof: {:.4}", qq_error(&md2, 6)?);
    println!(
        "chi2(4): cdf(4) = {:.6}, median = {:.6}",
        chi2_cdf(4.0, 4),
        chi2_quantile(0.5, 4, 1e-12)
    );
    Ok(())
}
