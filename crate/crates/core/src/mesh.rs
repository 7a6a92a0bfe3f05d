//! Graded radial meshes on [0, 1] with r^{N-1}-weighted quadrature.
//!
//! The surface-area constant of the N-ball is dropped everywhere: integrals
//! over the ball are represented as ∫₀¹ g(r) r^{N-1} dr. The constant cancels
//! on both sides of every inequality this crate evaluates.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh needs at least 16 cells, got {0}")]
    TooCoarse(usize),
    #[error("dimension must be >= 1 and finite, got {0}")]
    BadDimension(f64),
    #[error("grading must be >= 1 and finite, got {0}")]
    BadGrading(f64),
    #[error("grid function has {got} values, mesh has {want} nodes")]
    Shape { got: usize, want: usize },
}

/// Nodes 0 = r₀ < r₁ < … < r_M = 1 with quadrature weights for
/// ∫₀¹ · r^{N-1} dr. The dimension N may be non-integer.
#[derive(Debug, Clone)]
pub struct RadialMesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dimension: f64,
    grading: f64,
}

impl RadialMesh {
    /// Nodes r_j = (j/M)^grading; composite trapezoid weights against
    /// r^{N-1}, normalized so that constants integrate exactly to 1/N.
    pub fn new(cells: usize, dimension: f64, grading: f64) -> Result<Self, MeshError> {
        if cells < 16 {
            return Err(MeshError::TooCoarse(cells));
        }
        if !(dimension >= 1.0) || !dimension.is_finite() {
            return Err(MeshError::BadDimension(dimension));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(MeshError::BadGrading(grading));
        }
        let m = cells;
        let mut nodes = Vec::with_capacity(m + 1);
        for j in 0..=m {
            nodes.push((j as f64 / m as f64).powf(grading));
        }
        nodes[0] = 0.0;
        nodes[m] = 1.0;
        let mut weights = vec![0.0; m + 1];
        for k in 0..m {
            let h = nodes[k + 1] - nodes[k];
            weights[k] += 0.5 * h * nodes[k].powf(dimension - 1.0);
            weights[k + 1] += 0.5 * h * nodes[k + 1].powf(dimension - 1.0);
        }
        let total: f64 = weights.iter().sum();
        let scale = (1.0 / dimension) / total;
        for w in &mut weights {
            *w *= scale;
        }
        Ok(RadialMesh { nodes, weights, dimension, grading })
    }

    /// Default grading for a dimension: 1 for N <= 10, 1.5 above
    /// (the finer center resolves the blow-up region).
    pub fn default_grading(dimension: f64) -> f64 {
        if dimension > 10.0 { 1.5 } else { 1.0 }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes (cells + 1).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// First positive node r₁.
    pub fn first_positive(&self) -> f64 {
        self.nodes[1]
    }

    /// ∫₀¹ g r^{N-1} dr for nodal values g.
    pub fn integrate(&self, values: &[f64]) -> Result<f64, MeshError> {
        self.check_shape(values)?;
        Ok(self.weights.iter().zip(values).map(|(w, g)| w * g).sum())
    }

    /// Same, over nodes with r in [lo, hi] only.
    pub fn integrate_window(&self, values: &[f64], lo: f64, hi: f64) -> Result<f64, MeshError> {
        self.check_shape(values)?;
        Ok(self
            .nodes
            .iter()
            .zip(self.weights.iter().zip(values))
            .filter(|(r, _)| **r >= lo && **r <= hi)
            .map(|(_, (w, g))| w * g)
            .sum())
    }

    /// Nodal derivative by centered differences (one-sided at the ends).
    pub fn derivative(&self, values: &[f64]) -> Result<Vec<f64>, MeshError> {
        self.check_shape(values)?;
        let n = values.len();
        let r = &self.nodes;
        let mut d = vec![0.0; n];
        d[0] = (values[1] - values[0]) / (r[1] - r[0]);
        for j in 1..n - 1 {
            d[j] = (values[j + 1] - values[j - 1]) / (r[j + 1] - r[j - 1]);
        }
        d[n - 1] = (values[n - 1] - values[n - 2]) / (r[n - 1] - r[n - 2]);
        Ok(d)
    }

    /// Same mesh with twice as many cells.
    pub fn refine(&self) -> RadialMesh {
        RadialMesh::new(2 * self.cells(), self.dimension, self.grading).unwrap()
    }

    pub fn check_shape(&self, values: &[f64]) -> Result<(), MeshError> {
        if values.len() != self.nodes.len() {
            return Err(MeshError::Shape { got: values.len(), want: self.nodes.len() });
        }
        Ok(())
    }
}
