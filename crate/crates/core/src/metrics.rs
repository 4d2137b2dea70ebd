//! Error indices for trained maps: quantization error of data (QED) and of
//! landmarks (QEL), topographic error (TE), and square topographic error (STE).

use serde::Serialize;

use crate::error::{LamaError, Result};
use crate::grid::{sq_euclid, winner, winner_pair, Codebook, Dataset, LandmarkSet, NodeGrid};

/// Minimum spacing between lattice neighbours.
pub const D_TE: f64 = 1.0;
/// Margin added to the adjacency thresholds.
pub const EPSILON: f64 = 0.01;
/// Largest spacing within the eight-neighbourhood.
pub const D_STE: f64 = std::f64::consts::SQRT_2 * D_TE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub qed: f64,
    /// Absent when the map has no landmarks.
    pub qel: Option<f64>,
    pub te: f64,
    pub ste: f64,
}

fn check_dim(codebook: &Codebook, dim: usize) -> Result<()> {
    if dim == codebook.dim() {
        Ok(())
    } else {
        Err(LamaError::Shape {
            expected: codebook.dim(),
            found: dim,
        })
    }
}

/// Mean Euclidean distance between each data row and its winner's codebook vector.
pub fn qed(codebook: &Codebook, data: &Dataset) -> Result<f64> {
    check_dim(codebook, data.dim())?;
    let mut sum = 0.0;
    for n in 0..data.len() {
        let x = data.row(n);
        let k = winner(codebook, x)?;
        sum += sq_euclid(x, codebook.row(k)).sqrt();
    }
    Ok(sum / data.len() as f64)
}

/// Mean Euclidean distance between each landmark datum and the codebook
/// vector of its assigned node.
pub fn qel(codebook: &Codebook, landmarks: &LandmarkSet) -> Result<f64> {
    if landmarks.is_empty() {
        return Err(LamaError::Empty("landmark set"));
    }
    check_dim(codebook, landmarks.dim())?;
    let mut sum = 0.0;
    for (m, &label) in landmarks.labels().iter().enumerate() {
        if label >= codebook.len() {
            return Err(LamaError::Index {
                index: label,
                len: codebook.len(),
            });
        }
        sum += sq_euclid(landmarks.datum(m), codebook.row(label)).sqrt();
    }
    Ok(sum / landmarks.len() as f64)
}

/// Fraction of data whose two best-matching nodes lie farther apart on the
/// grid than `threshold`.
fn adjacency_error(codebook: &Codebook, data: &Dataset, grid: &NodeGrid, threshold: f64) -> Result<f64> {
    check_dim(codebook, data.dim())?;
    if codebook.len() != grid.len() {
        return Err(LamaError::Shape {
            expected: grid.len(),
            found: codebook.len(),
        });
    }
    let mut violations = 0usize;
    for n in 0..data.len() {
        let (first, second) = winner_pair(codebook, data.row(n))?;
        if grid.dist(first, second) > threshold {
            violations += 1;
        }
    }
    Ok(violations as f64 / data.len() as f64)
}

/// Topographic error with the four-neighbourhood (`D_TE + EPSILON`).
pub fn te(codebook: &Codebook, data: &Dataset, grid: &NodeGrid) -> Result<f64> {
    adjacency_error(codebook, data, grid, D_TE + EPSILON)
}

/// Square topographic error: diagonal neighbours also count as adjacent
/// (`D_STE + EPSILON`).
pub fn ste(codebook: &Codebook, data: &Dataset, grid: &NodeGrid) -> Result<f64> {
    adjacency_error(codebook, data, grid, D_STE + EPSILON)
}

/// All four indices; `qel` is computed only when landmarks are present.
pub fn evaluate(
    codebook: &Codebook,
    data: &Dataset,
    landmarks: &LandmarkSet,
    grid: &NodeGrid,
) -> Result<ErrorReport> {
    Ok(ErrorReport {
        qed: qed(codebook, data)?,
        qel: if landmarks.is_empty() {
            None
        } else {
            Some(qel(codebook, landmarks)?)
        },
        te: te(codebook, data, grid)?,
        ste: ste(codebook, data, grid)?,
    })
}
