//! Labelled embedding datasets: synthetic Gaussian-mixture generation,
//! the `MAPLE-EMB` text and `MEB1` binary file formats, and stratified
//! train/validation/test splitting.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::linalg::Matrix;
use crate::rng;

pub const TEXT_MAGIC: &str = "MAPLE-EMB";
pub const BINARY_MAGIC: &[u8; 4] = b"MEB1";

/// Feature matrix with original-class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if features.rows() == 0 || features.cols() == 0 {
            return Err(DataError::Invalid("dataset must have N >= 1 and D >= 1".into()));
        }
        if labels.len() != features.rows() {
            return Err(DataError::Invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if class_names.is_empty() {
            return Err(DataError::Invalid("no classes".into()));
        }
        if let Some(pos) = features.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(DataError::NonFinite {
                line: pos / features.cols() + 1,
                column: pos % features.cols() + 1,
            });
        }
        let k = class_names.len();
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(DataError::LabelOutOfRange {
                line: i + 1,
                label: l as i64,
                k,
            });
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `idx` as a new dataset sharing the class list.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureMode {
    pub mean: Vec<f64>,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureClass {
    pub name: String,
    pub modes: Vec<MixtureMode>,
}

/// Per-class isotropic Gaussian modes. Read from JSON by `maple gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub classes: Vec<MixtureClass>,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<usize, DataError> {
        let dim = self
            .classes
            .iter()
            .flat_map(|c| c.modes.first())
            .map(|m| m.mean.len())
            .next()
            .ok_or_else(|| DataError::InvalidSpec("no modes".into()))?;
        if dim == 0 {
            return Err(DataError::InvalidSpec("zero-dimensional mean".into()));
        }
        for c in &self.classes {
            if c.modes.is_empty() {
                return Err(DataError::InvalidSpec(format!("class {} has no modes", c.name)));
            }
            if c.name.is_empty() || c.name.chars().any(char::is_whitespace) {
                return Err(DataError::InvalidSpec(format!("bad class name {:?}", c.name)));
            }
            for m in &c.modes {
                if m.mean.len() != dim {
                    return Err(DataError::InvalidSpec("mode dimensions differ".into()));
                }
                if !(m.std > 0.0 && m.std.is_finite()) {
                    return Err(DataError::InvalidSpec(format!("std must be > 0, got {}", m.std)));
                }
                if m.count == 0 {
                    return Err(DataError::InvalidSpec("mode count must be >= 1".into()));
                }
                if m.mean.iter().any(|x| !x.is_finite()) {
                    return Err(DataError::InvalidSpec("non-finite mean".into()));
                }
            }
        }
        Ok(dim)
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::InvalidSpec(e.to_string()))
    }
}

/// Draws every mode's samples i.i.d. from its isotropic Gaussian, in class
/// then mode order. A pure function of the spec (seed included).
pub fn generate_mixture(spec: &MixtureSpec) -> Result<LabeledDataset, DataError> {
    let dim = spec.validate()?;
    let total: usize = spec.classes.iter().flat_map(|c| &c.modes).map(|m| m.count).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    for (label, class) in spec.classes.iter().enumerate() {
        for mode in &class.modes {
            for _ in 0..mode.count {
                for &mu in &mode.mean {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    data.push(mu + mode.std * z);
                }
                labels.push(label);
            }
        }
    }
    let names = spec.classes.iter().map(|c| c.name.clone()).collect();
    LabeledDataset::new(Matrix::from_vec(total, dim, data), labels, names)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn check_names(ds: &LabeledDataset) -> Result<(), DataError> {
    for n in ds.class_names() {
        if n.is_empty() || n.chars().any(char::is_whitespace) {
            return Err(DataError::Invalid(format!(
                "class name {n:?} cannot be written to the text format"
            )));
        }
    }
    Ok(())
}

/// Writes the text variant. Floats use Rust's shortest round-trip decimal
/// form, so loading reproduces every bit.
pub fn write_text<W: Write>(ds: &LabeledDataset, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "{TEXT_MAGIC} v1 N={} D={} K={}",
        ds.len(),
        ds.dim(),
        ds.num_classes()
    )?;
    write!(w, "classes")?;
    for n in ds.class_names() {
        write!(w, " {n}")?;
    }
    writeln!(w)?;
    for (row, label) in ds.features().row_iter().zip(ds.labels()) {
        write!(w, "{label}")?;
        for x in row {
            write!(w, " {x:?}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

fn parse_header(line: &str) -> Result<(usize, usize, usize), DataError> {
    let bad = |reason: &str| DataError::MalformedHeader {
        line: 1,
        reason: reason.to_string(),
    };
    let mut toks = line.split_whitespace();
    if toks.next() != Some(TEXT_MAGIC) {
        return Err(bad("missing MAPLE-EMB magic"));
    }
    if toks.next() != Some("v1") {
        return Err(bad("unsupported version"));
    }
    let mut field = |key: &str| -> Result<usize, DataError> {
        let tok = toks.next().ok_or_else(|| bad(&format!("missing {key}=")))?;
        tok.strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(&format!("expected {key}=<int>, got {tok:?}")))
    };
    let n = field("N")?;
    let d = field("D")?;
    let k = field("K")?;
    if toks.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    if n == 0 || d == 0 || k == 0 {
        return Err(bad("N, D and K must be positive"));
    }
    Ok((n, d, k))
}

pub fn read_text<R: BufRead>(r: R) -> Result<LabeledDataset, DataError> {
    let mut lines = r.lines();
    let mut next_line = |no: usize| -> Result<Option<String>, DataError> {
        lines.next().transpose().map_err(|e| DataError::MalformedHeader {
            line: no,
            reason: e.to_string(),
        })
    };
    let header = next_line(1)?.ok_or(DataError::MalformedHeader {
        line: 1,
        reason: "empty file".into(),
    })?;
    let (n, d, k) = parse_header(&header)?;
    let classes = next_line(2)?.ok_or(DataError::MalformedHeader {
        line: 2,
        reason: "missing class line".into(),
    })?;
    let mut toks = classes.split_whitespace();
    if toks.next() != Some("classes") {
        return Err(DataError::MalformedHeader {
            line: 2,
            reason: "expected `classes` line".into(),
        });
    }
    let names: Vec<String> = toks.map(str::to_string).collect();
    if names.len() != k {
        return Err(DataError::MalformedHeader {
            line: 2,
            reason: format!("K={k} but {} class names", names.len()),
        });
    }

    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut line_no = 2;
    while let Some(line) = next_line(line_no + 1)? {
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let label_tok = toks.next().unwrap_or_default();
        let label: i64 = label_tok.parse().map_err(|_| DataError::MalformedHeader {
            line: line_no,
            reason: format!("bad label {label_tok:?}"),
        })?;
        if label < 0 || label as usize >= k {
            return Err(DataError::LabelOutOfRange {
                line: line_no,
                label,
                k,
            });
        }
        let vals: Vec<&str> = toks.collect();
        if vals.len() != d {
            return Err(DataError::DimensionMismatch {
                line: line_no,
                expected: d,
                found: vals.len(),
            });
        }
        for (col, tok) in vals.iter().enumerate() {
            let x: f64 = tok.parse().map_err(|_| DataError::MalformedHeader {
                line: line_no,
                reason: format!("bad number {tok:?}"),
            })?;
            if !x.is_finite() {
                return Err(DataError::NonFinite {
                    line: line_no,
                    column: col + 1,
                });
            }
            data.push(x);
        }
        labels.push(label as usize);
    }
    if labels.len() != n {
        return Err(DataError::RecordCount {
            declared: n,
            found: labels.len(),
        });
    }
    LabeledDataset::new(Matrix::from_vec(n, d, data), labels, names)
}

/// Binary variant: features are narrowed to `f32`.
pub fn write_binary<W: Write>(ds: &LabeledDataset, mut w: W) -> std::io::Result<()> {
    w.write_all(BINARY_MAGIC)?;
    for v in [ds.len(), ds.dim(), ds.num_classes()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for name in ds.class_names() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for (row, &label) in ds.features().row_iter().zip(ds.labels()) {
        w.write_all(&(label as u32).to_le_bytes())?;
        for &x in row {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_binary<R: Read>(mut r: R) -> Result<LabeledDataset, DataError> {
    let header = |reason: String| DataError::MalformedHeader { line: 0, reason };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| header(e.to_string()))?;
    if &magic != BINARY_MAGIC {
        return Err(header("missing MEB1 magic".into()));
    }
    let mut u64_buf = [0u8; 8];
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        r.read_exact(&mut u64_buf).map_err(|e| header(e.to_string()))?;
        *d = u64::from_le_bytes(u64_buf) as usize;
    }
    let [n, d, k] = dims;
    if n == 0 || d == 0 || k == 0 {
        return Err(header("N, D and K must be positive".into()));
    }
    let mut u32_buf = [0u8; 4];
    let mut names = Vec::with_capacity(k);
    for _ in 0..k {
        r.read_exact(&mut u32_buf).map_err(|e| header(e.to_string()))?;
        let len = u32::from_le_bytes(u32_buf) as usize;
        let mut bytes = vec![0u8; len];
        r.read_exact(&mut bytes).map_err(|e| header(e.to_string()))?;
        names.push(String::from_utf8(bytes).map_err(|e| header(e.to_string()))?);
    }
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for rec in 0..n {
        r.read_exact(&mut u32_buf).map_err(|_| DataError::RecordCount {
            declared: n,
            found: rec,
        })?;
        let label = u32::from_le_bytes(u32_buf);
        if label as usize >= k {
            return Err(DataError::LabelOutOfRange {
                line: rec + 1,
                label: label as i64,
                k,
            });
        }
        labels.push(label as usize);
        for col in 0..d {
            r.read_exact(&mut u32_buf).map_err(|_| DataError::DimensionMismatch {
                line: rec + 1,
                expected: d,
                found: col,
            })?;
            let x = f32::from_le_bytes(u32_buf);
            if !x.is_finite() {
                return Err(DataError::NonFinite {
                    line: rec + 1,
                    column: col + 1,
                });
            }
            data.push(x as f64);
        }
    }
    LabeledDataset::new(Matrix::from_vec(n, d, data), labels, names)
}

fn is_binary_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("bin") | Some("meb")
    )
}

/// Writes `.bin`/`.meb` paths in the binary variant, anything else as text.
pub fn save_dataset(ds: &LabeledDataset, path: &Path) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    let w = BufWriter::new(file);
    if is_binary_path(path) {
        write_binary(ds, w).map_err(io_err(path))
    } else {
        check_names(ds)?;
        write_text(ds, w).map_err(io_err(path))
    }
}

/// Detects the variant from the leading magic bytes.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let head = r.fill_buf().map_err(io_err(path))?;
    if head.starts_with(BINARY_MAGIC) {
        read_binary(r)
    } else {
        read_text(r)
    }
}

/// Disjoint train/validation/test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class shuffled split. Each part receives `round(fraction · n_c)`
/// samples of class `c`, bumped to at least one.
pub fn stratified_split(
    ds: &LabeledDataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit, DataError> {
    let (ft, fv, fs) = fractions;
    for f in [ft, fv, fs] {
        if !(f > 0.0 && f.is_finite()) {
            return Err(DataError::InvalidFractions(format!(
                "fractions must be positive, got {fractions:?}"
            )));
        }
    }
    if ft + fv + fs > 1.0 + 1e-12 {
        return Err(DataError::InvalidFractions(format!(
            "fractions sum to {} > 1",
            ft + fv + fs
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes()];
    for (i, &l) in ds.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut split = DatasetSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (class, mut idx) in by_class.into_iter().enumerate() {
        let n = idx.len();
        if n == 0 {
            continue;
        }
        if n < 3 {
            return Err(DataError::ClassTooSmall {
                class,
                count: n,
                parts: 3,
            });
        }
        let mut rng = rng::stream(seed, &[rng::TAG_SPLIT, class as u64]);
        idx.shuffle(&mut rng);
        let part = |f: f64| ((f * n as f64).round() as usize).max(1);
        // Training share first, so it is exact whenever ft·n is whole.
        let nt = part(ft).min(n - 2);
        let nv = part(fv).min(n - nt - 1);
        let ns = part(fs).min(n - nt - nv);
        if ns == 0 {
            return Err(DataError::ClassTooSmall {
                class,
                count: n,
                parts: 3,
            });
        }
        split.train.extend_from_slice(&idx[..nt]);
        split.val.extend_from_slice(&idx[nt..nt + nv]);
        split.test.extend_from_slice(&idx[nt + nv..nt + nv + ns]);
    }
    Ok(split)
}
