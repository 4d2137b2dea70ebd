//! Input datasets: the UCI Zoo table, a synthetic vowel-formant dataset, and
//! min-max scaling onto the unit hypercube.

use std::io::{Read, Write};

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{LamaError, Result};
use crate::grid::Dataset;

/// Per-column affine map onto `[0, 1]`, fitted from data.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    /// Columns with `max == min`; they map to 0.
    pub constant_columns: Vec<usize>,
}

impl FeatureScaler {
    pub fn fit(data: &Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(LamaError::Empty("scaler input"));
        }
        let mut mins = Vec::with_capacity(data.ncols());
        let mut maxs = Vec::with_capacity(data.ncols());
        let mut constant_columns = Vec::new();
        for (j, col) in data.axis_iter(Axis(1)).enumerate() {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(LamaError::NonFinite { row: 0, col: j });
            }
            if hi == lo {
                constant_columns.push(j);
            }
            mins.push(lo);
            maxs.push(hi);
        }
        Ok(FeatureScaler {
            mins,
            maxs,
            constant_columns,
        })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn range(&self, col: usize) -> (f64, f64) {
        (self.mins[col], self.maxs[col])
    }

    fn check(&self, data: &Array2<f64>) -> Result<()> {
        if data.ncols() == self.dim() {
            Ok(())
        } else {
            Err(LamaError::Shape {
                expected: self.dim(),
                found: data.ncols(),
            })
        }
    }

    pub fn apply(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(data)?;
        let mut out = data.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.mins[j], self.maxs[j]);
            if hi == lo {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - lo) / (hi - lo));
            }
        }
        Ok(out)
    }

    /// Inverse map. Constant columns come back as their fitted value.
    pub fn invert(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        self.check(data)?;
        let mut out = data.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.mins[j], self.maxs[j]);
            col.mapv_inplace(|v| lo + v * (hi - lo));
        }
        Ok(out)
    }
}

/// Number of attribute columns used from the Zoo table (the trailing
/// `type` column is dropped).
pub const ZOO_FEATURES: usize = 16;
const ZOO_FIELDS: usize = ZOO_FEATURES + 2;

/// Animal names expected at the row indices used by the Zoo landmark presets.
pub const ZOO_LANDMARK_ROWS: [(usize, &str); 7] = [
    (21, "duck"),
    (48, "mink"),
    (58, "penguin"),
    (74, "seal"),
    (75, "sealion"),
    (80, "slowworm"),
    (89, "toad"),
];

/// Parses the UCI Zoo table (`name`, 16 attributes, `type`; no header) and
/// scales every attribute onto `[0, 1]`.
///
/// Rows keep file order; blank lines are skipped. Row numbers in errors are
/// 1-based line numbers of the data records.
pub fn load_zoo<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| LamaError::Parse {
            row,
            reason: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != ZOO_FIELDS {
            return Err(LamaError::Parse {
                row,
                reason: format!("expected {ZOO_FIELDS} fields, found {}", record.len()),
            });
        }
        names.push(record[0].to_string());
        for (j, field) in record.iter().enumerate().skip(1) {
            let v: f64 = field.parse().map_err(|_| LamaError::Parse {
                row,
                reason: format!("field {} is not numeric: {field:?}", j + 1),
            })?;
            if !v.is_finite() {
                return Err(LamaError::Parse {
                    row,
                    reason: format!("field {} is not finite", j + 1),
                });
            }
            if j <= ZOO_FEATURES {
                values.push(v);
            }
        }
    }
    if names.is_empty() {
        return Err(LamaError::Empty("zoo table"));
    }
    let raw = Array2::from_shape_vec((names.len(), ZOO_FEATURES), values).expect("row-major fill");
    let scaled = FeatureScaler::fit(&raw)?.apply(&raw)?;
    Dataset::new(scaled, Some(names))
}

/// Checks that the landmark rows used by the Zoo presets hold the expected
/// animals. Name lookups are by index, so duplicate names elsewhere are fine.
pub fn verify_zoo_rows(data: &Dataset) -> Result<()> {
    let names = data
        .names()
        .ok_or_else(|| LamaError::config("data", "zoo dataset has no row names"))?;
    for (idx, expected) in ZOO_LANDMARK_ROWS {
        match names.get(idx) {
            Some(name) if name == expected => {}
            Some(name) => {
                return Err(LamaError::Parse {
                    row: idx + 1,
                    reason: format!("expected {expected:?} at index {idx}, found {name:?}"),
                })
            }
            None => {
                return Err(LamaError::Index {
                    index: idx,
                    len: names.len(),
                })
            }
        }
    }
    Ok(())
}

/// Mean first and second formants (Hz) of the five Japanese vowels.
pub const VOWEL_FORMANTS: [(&str, f64, f64); 5] = [
    ("a", 850.0, 1610.0),
    ("i", 240.0, 2400.0),
    ("u", 300.0, 1390.0),
    ("e", 390.0, 2300.0),
    ("o", 360.0, 640.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct FormantSpec {
    pub samples_per_vowel: usize,
    /// Standard deviation along (F1, F2) in Hz.
    pub spread: (f64, f64),
    pub seed: u64,
}

impl Default for FormantSpec {
    fn default() -> Self {
        FormantSpec {
            samples_per_vowel: 40,
            spread: (60.0, 120.0),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FormantData {
    /// Scaled samples; row names are the vowel labels.
    pub dataset: Dataset,
    /// Unscaled samples in Hz, aligned with `dataset`.
    pub raw: Array2<f64>,
    /// Scaled vowel means, in [`VOWEL_FORMANTS`] order.
    pub vowel_means: Vec<(String, [f64; 2])>,
    pub scaler: FeatureScaler,
}

impl FormantData {
    pub fn vowel_mean(&self, vowel: &str) -> Option<[f64; 2]> {
        self.vowel_means
            .iter()
            .find(|(name, _)| name == vowel)
            .map(|(_, m)| *m)
    }

    /// Writes the unscaled samples as `f1,f2,vowel`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["f1", "f2", "vowel"]).map_err(csv_io)?;
        let names = self.dataset.names().expect("formant rows are named");
        for (row, name) in self.raw.outer_iter().zip(names) {
            w.write_record([format!("{}", row[0]), format!("{}", row[1]), name.clone()])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_io(e: csv::Error) -> LamaError {
    LamaError::Io(std::io::Error::other(e))
}

/// Draws isotropic Gaussian clusters around the five vowel means and scales
/// samples and means with one scaler fitted on both.
///
/// Samples are drawn vowel by vowel, F1 then F2 for each sample.
pub fn gen_formant(spec: &FormantSpec) -> Result<FormantData> {
    if spec.samples_per_vowel == 0 {
        return Err(LamaError::config("samples_per_vowel", "must be at least 1"));
    }
    let (s1, s2) = spec.spread;
    if !(s1 > 0.0 && s2 > 0.0 && s1.is_finite() && s2.is_finite()) {
        return Err(LamaError::config("spread", "both axes must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = VOWEL_FORMANTS.len() * spec.samples_per_vowel;
    let mut raw = Array2::zeros((n, 2));
    let mut names = Vec::with_capacity(n);
    for (v, &(name, f1, f2)) in VOWEL_FORMANTS.iter().enumerate() {
        let d1 = Normal::new(f1, s1).expect("positive spread");
        let d2 = Normal::new(f2, s2).expect("positive spread");
        for s in 0..spec.samples_per_vowel {
            let row = v * spec.samples_per_vowel + s;
            raw[[row, 0]] = d1.sample(&mut rng);
            raw[[row, 1]] = d2.sample(&mut rng);
            names.push(name.to_string());
        }
    }
    let means = Array2::from_shape_fn((VOWEL_FORMANTS.len(), 2), |(v, j)| match j {
        0 => VOWEL_FORMANTS[v].1,
        _ => VOWEL_FORMANTS[v].2,
    });
    let mut fit_rows = raw.clone();
    for m in means.outer_iter() {
        fit_rows.push_row(m).expect("two columns");
    }
    let scaler = FeatureScaler::fit(&fit_rows)?;
    let scaled = scaler.apply(&raw)?;
    let scaled_means = scaler.apply(&means)?;
    let vowel_means = VOWEL_FORMANTS
        .iter()
        .zip(scaled_means.outer_iter())
        .map(|(&(name, _, _), m)| (name.to_string(), [m[0], m[1]]))
        .collect();
    Ok(FormantData {
        dataset: Dataset::new(scaled, Some(names))?,
        raw,
        vowel_means,
        scaler,
    })
}
