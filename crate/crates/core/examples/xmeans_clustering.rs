//! X-Means picks the number of clusters by BIC; compare it with k-means at
//! a fixed k.
//!
//!     cargo run --example xmeans_clustering

use maple::cluster::{adjusted_rand_index, bic, kmeans, xmeans};
use maple::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let centres = [[0.0, 0.0], [20.0, 0.0], [10.0, 17.3]];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..200 {
            for &mu in centre {
                data.push(mu + rng.sample::<f64, _>(StandardNormal));
            }
            truth.push(c);
        }
    }
    let x = Matrix::from_vec(truth.len(), 2, data);

    for k in 1..=5 {
        let m = kmeans(&x, k, 0, 100)?;
        println!("k-means k={k}: BIC {:>10.1}  inertia {:>9.1}", bic(&x, &m)?, m.inertia);
    }
    let model = xmeans(&x, 5, 0)?;
    println!(
        "x-means: {} clusters, sizes {:?}, ARI vs generators {:.3}",
        model.num_clusters(),
        model.sizes(),
        adjusted_rand_index(&model.assignments, &truth)
    );
    let capped = xmeans(&x, 2, 0)?;
    println!("x-means capped at 2: {} clusters", capped.num_clusters());
    Ok(())
}
