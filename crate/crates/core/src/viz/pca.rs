use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};

use crate::error::{LamaError, Result};
use crate::grid::{Codebook, Dataset};

const COMPONENTS: usize = 3;

/// Top-three principal axes of the data, with data and codebook projected
/// onto them.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub mean: Array1<f64>,
    /// `3 x D`, one unit direction per row. Rows beyond `D` are zero.
    pub components: Array2<f64>,
    pub explained_variance: [f64; COMPONENTS],
    pub data: Array2<f64>,
    pub codebook: Array2<f64>,
    /// Set when `D < 3` and trailing components are zero padding.
    pub padded: bool,
}

impl PcaProjection {
    pub fn project(&self, x: &[f64]) -> [f64; COMPONENTS] {
        let mut out = [0.0; COMPONENTS];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self
                .components
                .row(c)
                .iter()
                .zip(x.iter().zip(self.mean.iter()))
                .map(|(u, (v, m))| u * (v - m))
                .sum();
        }
        out
    }
}

/// Fits PCA on the (mean-centred) data rows and projects data and codebook.
///
/// Each component's sign is chosen so its largest-magnitude coordinate is
/// positive, which makes renders reproducible.
pub fn pca_fit_project(codebook: &Codebook, data: &Dataset) -> Result<PcaProjection> {
    if data.dim() != codebook.dim() {
        return Err(LamaError::Shape {
            expected: codebook.dim(),
            found: data.dim(),
        });
    }
    let n = data.len();
    if n < 2 {
        return Err(LamaError::Degenerate(format!(
            "PCA needs at least 2 data rows, got {n}"
        )));
    }
    let d = data.dim();
    let mean = data.rows().mean_axis(Axis(0)).expect("non-empty");
    let centred = data.rows() - &mean;
    let cov = centred.t().dot(&centred) / (n - 1) as f64;

    let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite covariance")
            .then(a.cmp(&b))
    });

    let mut components = Array2::zeros((COMPONENTS, d));
    let mut explained_variance = [0.0; COMPONENTS];
    for (c, &idx) in order.iter().take(COMPONENTS).enumerate() {
        let v = eig.eigenvectors.column(idx);
        let pivot = (0..d)
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap().then(b.cmp(&a)))
            .expect("d >= 1");
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[[c, j]] = sign * v[j];
        }
        explained_variance[c] = eig.eigenvalues[idx].max(0.0);
    }

    let data_proj = centred.dot(&components.t());
    let codebook_proj = (codebook.weights() - &mean).dot(&components.t());
    Ok(PcaProjection {
        mean,
        components,
        explained_variance,
        data: data_proj,
        codebook: codebook_proj,
        padded: d < COMPONENTS,
    })
}
