//! Trains the MLP with triplet loss and latent relabelling on a mixture
//! whose first class has two far-apart modes. The first argument is the
//! false-negative-ratio trigger `t`; at 0 any class with a single miss at a
//! validation check is re-clustered, at 1 nothing ever splits.
//!
//!     RUST_LOG=info cargo run --release --example train_classifier -- 0

use maple::dataio::{generate_mixture, stratified_split, MixtureClass, MixtureMode, MixtureSpec};
use maple::nn::TrainConfig;
use maple::relabel::train_maple;

fn mode(mean: [f64; 3], count: usize) -> MixtureMode {
    MixtureMode {
        mean: mean.to_vec(),
        std: 0.1,
        count,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let t: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.0);
    // Class "split" sits on both sides of class "mid", so one linear
    // decision region cannot cover it.
    let spec = MixtureSpec {
        classes: vec![
            MixtureClass {
                name: "split".into(),
                modes: vec![mode([-1.0, 0.0, 0.0], 200), mode([1.0, 0.0, 0.0], 200)],
            },
            MixtureClass {
                name: "mid".into(),
                modes: vec![mode([0.0, 0.0, 0.0], 400)],
            },
        ],
        seed: 1,
    };
    let ds = generate_mixture(&spec)?;
    let split = stratified_split(&ds, (0.8, 0.1, 0.1), 1)?;

    let config = TrainConfig {
        max_epochs: 30,
        validation_period: 5,
        learning_rate: 0.01,
        fnr_threshold: t,
        ..TrainConfig::default()
    };
    let out = train_maple(&ds, &split, &config)?;
    for r in out.log.iter().filter(|r| r.epoch % 5 == 0) {
        println!(
            "epoch {:>2}  ce {:.4}  triplet {:.4}  val_acc {:.3}  K {}",
            r.epoch, r.ce_loss, r.triplet_loss, r.val_acc, r.k
        );
    }
    if out.state.history.is_empty() {
        println!("no class crossed t = {t}");
    }
    for e in &out.state.history {
        println!("epoch {}: split classes {:?}, K -> {}", e.epoch, e.classes_split, e.k_after);
    }
    println!("pseudo-class -> class: {:?}", out.state.label_map.pseudo_to_original());
    Ok(())
}
