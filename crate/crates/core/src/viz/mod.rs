//! Map visualization: simplified U-matrix, label placement, lattice mesh
//! edges, PCA projections, and SVG/CSV rendering.

mod pca;
pub mod render;

pub use pca::{pca_fit_project, PcaProjection};

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{LamaError, Result};
use crate::grid::{sq_euclid, Codebook, NodeGrid};

/// Simplified U-matrix: per node, the sum of squared codebook distances to
/// its four lattice neighbours (fewer on the border). Indexed `[x, y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UMatrix {
    pub values: Array2<f64>,
}

impl UMatrix {
    pub fn kx(&self) -> usize {
        self.values.nrows()
    }

    pub fn ky(&self) -> usize {
        self.values.ncols()
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[[x, y]]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

pub fn umatrix(codebook: &Codebook, grid: &NodeGrid) -> Result<UMatrix> {
    if codebook.len() != grid.len() {
        return Err(LamaError::Shape {
            expected: grid.len(),
            found: codebook.len(),
        });
    }
    let (kx, ky) = (grid.kx(), grid.ky());
    let mut values = Array2::zeros((kx, ky));
    for y in 0..ky {
        for x in 0..kx {
            let k = y * kx + x;
            let w = codebook.row(k);
            let mut sum = 0.0;
            if x > 0 {
                sum += sq_euclid(w, codebook.row(k - 1));
            }
            if x + 1 < kx {
                sum += sq_euclid(w, codebook.row(k + 1));
            }
            if y > 0 {
                sum += sq_euclid(w, codebook.row(k - kx));
            }
            if y + 1 < ky {
                sum += sq_euclid(w, codebook.row(k + kx));
            }
            values[[x, y]] = sum;
        }
    }
    Ok(UMatrix { values })
}

/// All unordered node pairs one lattice step apart, horizontal edges first.
pub fn mesh_edges(grid: &NodeGrid) -> Vec<(usize, usize)> {
    let (kx, ky) = (grid.kx(), grid.ky());
    let mut edges = Vec::with_capacity(kx * ky.saturating_sub(1) + ky * kx.saturating_sub(1));
    for y in 0..ky {
        for x in 0..kx.saturating_sub(1) {
            let k = y * kx + x;
            edges.push((k, k + 1));
        }
    }
    for y in 0..ky.saturating_sub(1) {
        for x in 0..kx {
            let k = y * kx + x;
            edges.push((k, k + kx));
        }
    }
    edges
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub node: usize,
    pub names: Vec<String>,
    pub is_landmark: bool,
}

impl Placement {
    /// More than one label landed on this node.
    pub fn is_multi(&self) -> bool {
        self.names.len() > 1
    }
}

/// Labels grouped by the node they project onto, in node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelOverlay {
    pub placements: Vec<Placement>,
}

impl LabelOverlay {
    pub fn node_of(&self, name: &str) -> Option<usize> {
        self.placements
            .iter()
            .find(|p| p.names.iter().any(|n| n == name))
            .map(|p| p.node)
    }
}

/// Groups data names by winner node and marks landmark placements.
///
/// `landmarks` holds `(name, winner node)` for each landmark datum. A
/// landmark whose name already sits on that node only sets the flag;
/// otherwise its name is added to the node.
pub fn label_overlay(
    projections: &[usize],
    names: &[String],
    landmarks: &[(String, usize)],
) -> Result<LabelOverlay> {
    if projections.len() != names.len() {
        return Err(LamaError::Shape {
            expected: projections.len(),
            found: names.len(),
        });
    }
    let mut by_node: BTreeMap<usize, Placement> = BTreeMap::new();
    for (&node, name) in projections.iter().zip(names) {
        by_node
            .entry(node)
            .or_insert_with(|| Placement {
                node,
                names: Vec::new(),
                is_landmark: false,
            })
            .names
            .push(name.clone());
    }
    for (name, node) in landmarks {
        let p = by_node.entry(*node).or_insert_with(|| Placement {
            node: *node,
            names: Vec::new(),
            is_landmark: false,
        });
        p.is_landmark = true;
        if !p.names.contains(name) {
            p.names.push(name.clone());
        }
    }
    Ok(LabelOverlay {
        placements: by_node.into_values().collect(),
    })
}
