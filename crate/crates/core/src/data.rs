//! Input files and seeded synthetic problems.
//!
//! Classification and regression data use the svmlight/libsvm text format
//! (`label idx:val ...`, 1-based ascending indices). Covariance matrices are
//! headerless CSV, one row per line.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numkit::{CsrMatrix, SymmetricDense};

/// Largest asymmetry `|A_ij - A_ji|` accepted by [`read_covariance`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// How libsvm labels are interpreted.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum LabelMapping {
    /// Labels must already be `+1` or `-1`.
    #[default]
    PlusMinusOne,
    /// The given value maps to `+1`, every other label to `-1`.
    Positive(f64),
    /// Real-valued targets, kept as read.
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub data: CsrMatrix,
    pub labels: Vec<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses libsvm text. `features` overrides the column count, which otherwise
/// is the largest index seen.
pub fn read_libsvm<R: BufRead>(
    reader: R,
    features: Option<usize>,
    mapping: LabelMapping,
) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let raw: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label '{label_tok}'")))?;
        let label = match mapping {
            LabelMapping::PlusMinusOne if raw == 1.0 || raw == -1.0 => raw,
            LabelMapping::PlusMinusOne => {
                return Err(Error::InvalidArgument(format!(
                    "line {lineno}: label {raw} is not +1/-1; pass a label mapping"
                )))
            }
            LabelMapping::Positive(pos) => {
                if raw == pos {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelMapping::Real => raw,
        };

        let mut row = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, found '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index '{idx}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, format!("index {idx} is not ascending")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value '{val}'")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value '{val}'")));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(last);
        rows.push(row);
        labels.push(label);
    }

    if rows.is_empty() {
        return Err(Error::InvalidArgument(
            "libsvm input contains no samples".into(),
        ));
    }
    let cols = match features {
        Some(p) if p < max_index => {
            return Err(Error::InvalidArgument(format!(
                "feature count {p} is smaller than the largest index {max_index}"
            )))
        }
        Some(p) => p,
        None => max_index,
    };
    Ok(Dataset {
        data: CsrMatrix::from_rows(cols, &rows)?,
        labels,
    })
}

pub fn load_libsvm(path: &Path, features: Option<usize>, mapping: LabelMapping) -> Result<Dataset> {
    read_libsvm(BufReader::new(File::open(path)?), features, mapping)
}

/// Writes libsvm text with shortest round-trip float formatting.
pub fn write_libsvm<W: Write>(mut out: W, data: &CsrMatrix, labels: &[f64]) -> Result<()> {
    if labels.len() != data.rows() {
        return Err(Error::DimensionMismatch {
            expected: data.rows(),
            found: labels.len(),
        });
    }
    for (r, label) in labels.iter().enumerate() {
        if *label == 1.0 {
            write!(out, "+1")?;
        } else {
            write!(out, "{label}")?;
        }
        for (c, v) in data.row(r) {
            write!(out, " {}:{}", c + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_libsvm(path: &Path, data: &CsrMatrix, labels: &[f64]) -> Result<()> {
    write_libsvm(std::io::BufWriter::new(File::create(path)?), data, labels)
}

/// Reads a square CSV matrix and returns `(A + A^T) / 2`.
pub fn read_covariance<R: Read>(reader: R) -> Result<SymmetricDense> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut order = None;
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let width = *order.get_or_insert(rec.len());
        if rec.len() != width {
            return Err(Error::Input(format!(
                "covariance row {} has {} entries, expected {width}",
                i + 1,
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad number '{field}'")))?;
            data.push(v);
        }
        rows += 1;
    }
    let p = order.unwrap_or(0);
    if p == 0 {
        return Err(Error::Input("covariance file is empty".into()));
    }
    if rows != p {
        return Err(Error::Input(format!(
            "covariance is {rows} x {p}, not square"
        )));
    }
    for i in 0..p {
        for j in i + 1..p {
            let gap = (data[i * p + j] - data[j * p + i]).abs();
            if gap > SYMMETRY_TOL {
                return Err(Error::Input(format!(
                    "covariance is not symmetric at ({}, {}): gap {gap:e}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    SymmetricDense::symmetrized(p, &data)
}

pub fn load_covariance(path: &Path) -> Result<SymmetricDense> {
    read_covariance(File::open(path)?)
}

pub fn write_covariance<W: Write>(out: W, s: &SymmetricDense) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for i in 0..s.order() {
        wtr.write_record(s.row(i).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_covariance(path: &Path, s: &SymmetricDense) -> Result<()> {
    write_covariance(File::create(path)?, s)
}

/// Synthetic regression or classification problem with a sparse ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticProblem {
    pub data: CsrMatrix,
    pub labels: Vec<f64>,
    pub truth: Vec<f64>,
}

/// Shape of a synthetic problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub samples: usize,
    pub features: usize,
    /// Nonzeros of the ground truth.
    pub support: usize,
    /// Fraction of feature entries that are stored; 1.0 gives dense rows.
    pub density: f64,
    /// Standard deviation of the additive noise.
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(samples: usize, features: usize, support: usize, seed: u64) -> Self {
        Self {
            samples,
            features,
            support,
            density: 1.0,
            noise: 0.1,
            seed,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn synthetic_design(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<(CsrMatrix, Vec<f64>)> {
    if spec.support > spec.features || spec.samples == 0 || spec.features == 0 {
        return Err(Error::InvalidArgument(
            "synthetic shape needs samples, features >= support".into(),
        ));
    }
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(Error::InvalidArgument("density must lie in (0, 1]".into()));
    }
    let mut truth = vec![0.0; spec.features];
    for j in sample(rng, spec.features, spec.support) {
        let mag = 0.5 + rng.random::<f64>();
        truth[j] = if rng.random_bool(0.5) { mag } else { -mag };
    }
    // Scale keeps row norms near one whatever the density.
    let scale = 1.0 / (spec.density * spec.features as f64).sqrt();
    let mut rows = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let mut row = Vec::new();
        for j in 0..spec.features {
            if spec.density >= 1.0 || rng.random_bool(spec.density) {
                let v = gaussian(rng) * scale;
                if v != 0.0 {
                    row.push((j, v));
                }
            }
        }
        rows.push(row);
    }
    Ok((CsrMatrix::from_rows(spec.features, &rows)?, truth))
}

/// Gaussian features and `y = sign(x^T w_true + noise)`.
pub fn synthetic_logistic(spec: &SyntheticSpec) -> Result<SyntheticProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (data, truth) = synthetic_design(spec, &mut rng)?;
    let mut margin = vec![0.0; data.rows()];
    data.mul_vec(&truth, &mut margin);
    let labels = margin
        .iter()
        .map(|&m| {
            if m + spec.noise * gaussian(&mut rng) >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Ok(SyntheticProblem {
        data,
        labels,
        truth,
    })
}

/// Gaussian features and `y = x^T w_true + noise`.
pub fn synthetic_lasso(spec: &SyntheticSpec) -> Result<SyntheticProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (data, truth) = synthetic_design(spec, &mut rng)?;
    let mut y = vec![0.0; data.rows()];
    data.mul_vec(&truth, &mut y);
    for yi in &mut y {
        *yi += spec.noise * gaussian(&mut rng);
    }
    Ok(SyntheticProblem {
        data,
        labels: y,
        truth,
    })
}

/// Sample covariance of `samples` draws from a Gaussian whose precision
/// matrix is a sparse, diagonally dominant perturbation of the identity.
/// Positive definite whenever `samples > p`.
pub fn synthetic_covariance(p: usize, samples: usize, seed: u64) -> Result<SymmetricDense> {
    if p == 0 || samples <= p {
        return Err(Error::InvalidArgument("need samples > p > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Lower-triangular factor of the precision: unit diagonal plus sparse off-diagonals.
    let mut factor = vec![0.0; p * p];
    for i in 0..p {
        factor[i * p + i] = 1.0;
        for j in 0..i {
            if rng.random_bool(0.2) {
                factor[i * p + j] = rng.random_range(-1.0..1.0);
            }
        }
    }
    // x = L^{-T} z has covariance (L L^T)^{-1}; solve by back substitution.
    let mut acc = vec![0.0; p * p];
    let mut x = vec![0.0; p];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = gaussian(&mut rng);
        }
        for i in (0..p).rev() {
            let mut v = x[i];
            for k in i + 1..p {
                v -= factor[k * p + i] * x[k];
            }
            x[i] = v / factor[i * p + i];
        }
        for i in 0..p {
            for j in 0..p {
                acc[i * p + j] += x[i] * x[j];
            }
        }
    }
    for v in &mut acc {
        *v /= samples as f64;
    }
    SymmetricDense::symmetrized(p, &acc)
}
