//! Gaussian-mixture data from a JSON spec, written in both file formats and
//! split per class.
//!
//!     cargo run --example generate_data -- /tmp/mixture

use std::path::PathBuf;

use maple::dataio::{generate_mixture, load_dataset, save_dataset, stratified_split, MixtureSpec};

const SPEC: &str = r#"{
  "seed": 7,
  "classes": [
    {"name": "ring", "modes": [{"mean": [0, 0], "std": 0.2, "count": 100},
                               {"mean": [4, 4], "std": 0.2, "count": 100}]},
    {"name": "dot",  "modes": [{"mean": [4, 0], "std": 0.2, "count": 150}]}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let spec = MixtureSpec::from_json(SPEC)?;
    let ds = generate_mixture(&spec)?;
    println!("{} samples, D = {}, class counts {:?}", ds.len(), ds.dim(), ds.class_counts());

    // Text keeps every bit; binary stores f32.
    let text = dir.join("mixture.txt");
    let bin = dir.join("mixture.bin");
    save_dataset(&ds, &text)?;
    save_dataset(&ds, &bin)?;
    let reread = load_dataset(&bin)?;
    let worst = reread.features().max_abs_diff(ds.features());
    println!("wrote {} and {} (binary round-trip error {worst:.1e})", text.display(), bin.display());

    let split = stratified_split(&ds, (0.8, 0.1, 0.1), 0)?;
    println!("split: {} train / {} val / {} test", split.train.len(), split.val.len(), split.test.len());
    Ok(())
}
