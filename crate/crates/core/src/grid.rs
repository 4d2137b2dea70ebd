//! Map geometry and storage: the node lattice, the codebook, input data,
//! landmarks, and winner-node queries.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{LamaError, Result};

/// Fixed output-space lattice of `kx * ky` nodes laid out row-major.
///
/// Node `k` sits at `(k % kx, k / kx)`, so neighbouring nodes are exactly one
/// grid unit apart along each axis. Locations are kept as general vectors
/// (one row per node) even though the shipped layout is two-dimensional.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    kx: usize,
    ky: usize,
    locations: Array2<f64>,
}

impl NodeGrid {
    pub fn new(kx: usize, ky: usize) -> Result<Self> {
        if kx == 0 {
            return Err(LamaError::config("kx", "must be a positive integer"));
        }
        if ky == 0 {
            return Err(LamaError::config("ky", "must be a positive integer"));
        }
        let locations = Array2::from_shape_fn((kx * ky, 2), |(k, axis)| match axis {
            0 => (k % kx) as f64,
            _ => (k / kx) as f64,
        });
        Ok(NodeGrid { kx, ky, locations })
    }

    pub fn kx(&self) -> usize {
        self.kx
    }

    pub fn ky(&self) -> usize {
        self.ky
    }

    /// Number of nodes `K`.
    pub fn len(&self) -> usize {
        self.kx * self.ky
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Output-space dimensionality of the location vectors.
    pub fn output_dim(&self) -> usize {
        self.locations.ncols()
    }

    /// Location vector of node `k`.
    pub fn location(&self, k: usize) -> Result<ArrayView1<'_, f64>> {
        self.check(k)?;
        Ok(self.locations.row(k))
    }

    /// Integer lattice coordinates `(x, y)` of node `k`.
    pub fn coords(&self, k: usize) -> Result<(usize, usize)> {
        self.check(k)?;
        Ok((k % self.kx, k / self.kx))
    }

    /// Node index at lattice coordinates `(x, y)`.
    pub fn index(&self, x: usize, y: usize) -> Result<usize> {
        if x >= self.kx {
            return Err(LamaError::Index {
                index: x,
                len: self.kx,
            });
        }
        if y >= self.ky {
            return Err(LamaError::Index {
                index: y,
                len: self.ky,
            });
        }
        Ok(y * self.kx + x)
    }

    /// Squared output-space distance `|v_a - v_b|^2`.
    ///
    /// Callers inside the crate pass indices that are already validated.
    pub fn sq_dist(&self, a: usize, b: usize) -> f64 {
        let va = self.locations.row(a);
        let vb = self.locations.row(b);
        va.iter().zip(vb.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.sq_dist(a, b).sqrt()
    }

    /// Chebyshev (king-move) lattice distance between two nodes.
    pub fn chebyshev(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = (a % self.kx, a / self.kx);
        let (bx, by) = (b % self.kx, b / self.kx);
        ax.abs_diff(bx).max(ay.abs_diff(by))
    }

    pub(crate) fn check(&self, k: usize) -> Result<()> {
        if k < self.len() {
            Ok(())
        } else {
            Err(LamaError::Index {
                index: k,
                len: self.len(),
            })
        }
    }
}

fn check_finite(m: &Array2<f64>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(LamaError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Trainable `K x D` matrix of codebook vectors, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    weights: Array2<f64>,
}

impl Codebook {
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        if weights.nrows() == 0 {
            return Err(LamaError::Empty("codebook"));
        }
        check_finite(&weights)?;
        Ok(Codebook {
            weights: weights.as_standard_layout().into_owned(),
        })
    }

    /// Builds a codebook and checks that it has one row per grid node.
    pub fn for_grid(weights: Array2<f64>, grid: &NodeGrid) -> Result<Self> {
        if weights.nrows() != grid.len() {
            return Err(LamaError::Shape {
                expected: grid.len(),
                found: weights.nrows(),
            });
        }
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.weights
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.weights.as_slice().expect("standard layout")[k * d..(k + 1) * d]
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(LamaError::Shape {
                expected: self.dim(),
                found: x.len(),
            })
        }
    }
}

/// `N x D` input matrix with optional row names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Array2<f64>,
    names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(rows: Array2<f64>, names: Option<Vec<String>>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(LamaError::Empty("dataset"));
        }
        check_finite(&rows)?;
        if let Some(names) = &names {
            if names.len() != rows.nrows() {
                return Err(LamaError::Shape {
                    expected: rows.nrows(),
                    found: names.len(),
                });
            }
        }
        Ok(Dataset {
            rows: rows.as_standard_layout().into_owned(),
            names,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let d = self.dim();
        &self.rows.as_slice().expect("standard layout")[n * d..(n + 1) * d]
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Row name, or the row index rendered as text when the dataset is unnamed.
    pub fn name(&self, n: usize) -> String {
        match &self.names {
            Some(names) => names[n].clone(),
            None => n.to_string(),
        }
    }
}

/// `M` landmark pairs: a landmark datum and the node it is pinned to.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    data: Array2<f64>,
    labels: Vec<usize>,
}

impl LandmarkSet {
    /// Validates that labels are distinct node indices below `node_count`.
    pub fn new(data: Array2<f64>, labels: Vec<usize>, node_count: usize) -> Result<Self> {
        if data.nrows() != labels.len() {
            return Err(LamaError::Shape {
                expected: labels.len(),
                found: data.nrows(),
            });
        }
        check_finite(&data)?;
        for (m, &label) in labels.iter().enumerate() {
            if label >= node_count {
                return Err(LamaError::Index {
                    index: label,
                    len: node_count,
                });
            }
            if labels[..m].contains(&label) {
                return Err(LamaError::config(
                    "landmarks",
                    format!("node {label} is assigned more than one landmark"),
                ));
            }
        }
        Ok(LandmarkSet {
            data: data.as_standard_layout().into_owned(),
            labels,
        })
    }

    /// The empty set (`M = 0`) for a `dim`-dimensional input space.
    pub fn empty(dim: usize) -> Self {
        LandmarkSet {
            data: Array2::zeros((0, dim)),
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn datum(&self, m: usize) -> &[f64] {
        let d = self.dim();
        &self.data.as_slice().expect("standard layout")[m * d..(m + 1) * d]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

#[inline]
pub(crate) fn sq_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Node whose codebook vector is nearest to `x`; ties go to the lowest index.
pub fn winner(codebook: &Codebook, x: &[f64]) -> Result<usize> {
    codebook.check_dim(x)?;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, w) in codebook.weights.axis_iter(Axis(0)).enumerate() {
        let d = sq_euclid(w.as_slice().expect("standard layout"), x);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    Ok(best)
}

/// First- and second-place winner nodes for `x`, lowest index first on ties.
pub fn winner_pair(codebook: &Codebook, x: &[f64]) -> Result<(usize, usize)> {
    if codebook.len() < 2 {
        return Err(LamaError::InsufficientNodes {
            required: 2,
            found: codebook.len(),
        });
    }
    codebook.check_dim(x)?;
    let (mut first, mut second) = (usize::MAX, usize::MAX);
    let (mut d1, mut d2) = (f64::INFINITY, f64::INFINITY);
    for (k, w) in codebook.weights.axis_iter(Axis(0)).enumerate() {
        let d = sq_euclid(w.as_slice().expect("standard layout"), x);
        if d < d1 {
            second = first;
            d2 = d1;
            first = k;
            d1 = d;
        } else if d < d2 {
            second = k;
            d2 = d;
        }
    }
    Ok((first, second))
}

/// Winner node of every data row, in row order.
pub fn project_all(codebook: &Codebook, data: &Dataset) -> Result<Vec<usize>> {
    if data.dim() != codebook.dim() {
        return Err(LamaError::Shape {
            expected: codebook.dim(),
            found: data.dim(),
        });
    }
    (0..data.len()).map(|n| winner(codebook, data.row(n))).collect()
}
