//! Grid-function containers: solution pairs and test-function pairs.

use crate::mesh::{MeshError, RadialMesh};
use crate::system::ParamPoint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Shape(#[from] MeshError),
    #[error("boundary value must vanish, got {0}")]
    BoundaryNotZero(f64),
    #[error("negative value {value} at node {node}")]
    Negative { node: usize, value: f64 },
    #[error("values increase at node {node} by {jump}")]
    NotDecreasing { node: usize, jump: f64 },
}

/// A pair of grid functions (u, v) on a radial mesh at a parameter point.
/// Values include the boundary node, where both components vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub param: ParamPoint,
}

impl SolutionPair {
    pub fn zero(mesh: &RadialMesh, param: ParamPoint) -> Self {
        SolutionPair { u: vec![0.0; mesh.len()], v: vec![0.0; mesh.len()], param }
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_v(&self) -> f64 {
        self.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks the boundary condition, nonnegativity, and radial monotone
    /// decrease, each up to `tol`.
    pub fn check_minimal_shape(&self, mesh: &RadialMesh, tol: f64) -> Result<(), SolutionError> {
        mesh.check_shape(&self.u)?;
        mesh.check_shape(&self.v)?;
        for grid in [&self.u, &self.v] {
            let b = *grid.last().unwrap();
            if b.abs() > tol {
                return Err(SolutionError::BoundaryNotZero(b));
            }
            let scale = 1.0 + grid.iter().cloned().fold(0.0, f64::max).abs();
            for (node, &value) in grid.iter().enumerate() {
                if value < -tol * scale {
                    return Err(SolutionError::Negative { node, value });
                }
            }
            for node in 1..grid.len() {
                let jump = grid[node] - grid[node - 1];
                if jump > tol * scale {
                    return Err(SolutionError::NotDecreasing { node, jump });
                }
            }
        }
        Ok(())
    }
}

/// Zero-boundary test functions (φ, ψ).
#[derive(Debug, Clone)]
pub struct TestFunctionPair {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl TestFunctionPair {
    pub fn new(mesh: &RadialMesh, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self, SolutionError> {
        mesh.check_shape(&phi)?;
        mesh.check_shape(&psi)?;
        for grid in [&phi, &psi] {
            let b = *grid.last().unwrap();
            if b != 0.0 {
                return Err(SolutionError::BoundaryNotZero(b));
            }
        }
        Ok(TestFunctionPair { phi, psi })
    }

    pub fn zero(mesh: &RadialMesh) -> Self {
        TestFunctionPair { phi: vec![0.0; mesh.len()], psi: vec![0.0; mesh.len()] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> RadialMesh {
        RadialMesh::new(16, 2.0, 1.0).unwrap()
    }

    #[test]
    fn minimal_shape_accepts_decreasing_profile() {
        let mesh = mesh();
        let p = ParamPoint::new(1.0, 1.0).unwrap();
        let u: Vec<f64> = mesh.nodes().iter().map(|r| 1.0 - r * r).collect();
        let sol = SolutionPair { u: u.clone(), v: u, param: p };
        assert!(sol.check_minimal_shape(&mesh, 1e-12).is_ok());
    }

    #[test]
    fn minimal_shape_rejects_bad_profiles() {
        let mesh = mesh();
        let p = ParamPoint::new(1.0, 1.0).unwrap();
        let mut u: Vec<f64> = mesh.nodes().iter().map(|r| 1.0 - r * r).collect();
        u[3] = -0.5;
        let sol = SolutionPair { u, v: vec![0.0; mesh.len()], param: p };
        assert!(matches!(sol.check_minimal_shape(&mesh, 1e-12), Err(SolutionError::Negative { .. })));

        let mut u: Vec<f64> = mesh.nodes().iter().map(|r| 1.0 - r * r).collect();
        u[4] = u[3] + 0.2;
        let sol = SolutionPair { u, v: vec![0.0; mesh.len()], param: p };
        assert!(matches!(
            sol.check_minimal_shape(&mesh, 1e-12),
            Err(SolutionError::NotDecreasing { .. })
        ));

        let u: Vec<f64> = mesh.nodes().iter().map(|_| 1.0).collect();
        let sol = SolutionPair { u, v: vec![0.0; mesh.len()], param: p };
        assert!(matches!(
            sol.check_minimal_shape(&mesh, 1e-12),
            Err(SolutionError::BoundaryNotZero(_))
        ));
    }

    #[test]
    fn test_functions_must_vanish_at_boundary() {
        let mesh = mesh();
        let ok: Vec<f64> = mesh.nodes().iter().map(|r| (std::f64::consts::PI * r).sin()).collect();
        let mut phi = ok.clone();
        *phi.last_mut().unwrap() = 0.0;
        assert!(TestFunctionPair::new(&mesh, phi.clone(), phi.clone()).is_ok());
        let mut bad = phi;
        *bad.last_mut().unwrap() = 0.1;
        assert!(TestFunctionPair::new(&mesh, bad, vec![0.0; mesh.len()]).is_err());
    }
}
