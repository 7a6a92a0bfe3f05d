//! Discretization of the radial operator w ↦ -(w'' + (N-1)/r w').
//!
//! Rows are defined at nodes 0..M-1 (the boundary node carries the Dirichlet
//! condition). At r = 0 the symmetry condition w'(0) = 0 gives the limit
//! -Δw(0) = -N w''(0), realized by a one-sided stencil on the first cell.

use crate::mesh::{MeshError, RadialMesh};

/// Three-point stencil rows of the radial Laplacian on a mesh.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    /// (lower, diagonal, upper) coefficients per row j = 0..M-1;
    /// row 0 has no lower neighbor (coefficient stored as 0).
    rows: Vec<(f64, f64, f64)>,
}

impl RadialLaplacian {
    pub fn new(mesh: &RadialMesh) -> Self {
        let r = mesh.nodes();
        let n = mesh.dimension();
        let m = mesh.cells();
        let mut rows = Vec::with_capacity(m);
        // center row: -N w''(0) with w(r) ~ w0 + c r^2 => c = (w1 - w0)/r1^2
        let c0 = 2.0 * n / (r[1] * r[1]);
        rows.push((0.0, c0, -c0));
        for j in 1..m {
            let hm = r[j] - r[j - 1];
            let hp = r[j + 1] - r[j];
            let sum = hm + hp;
            // second derivative
            let cm = 2.0 / (hm * sum);
            let cc = -2.0 / (hm * hp);
            let cp = 2.0 / (hp * sum);
            // first derivative
            let dm = -hp / (hm * sum);
            let dc = (hp - hm) / (hm * hp);
            let dp = hm / (hp * sum);
            let a = (n - 1.0) / r[j];
            rows.push((-(cm + a * dm), -(cc + a * dc), -(cp + a * dp)));
        }
        RadialLaplacian { rows }
    }

    /// Number of operator rows (= unknown nodes).
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, j: usize) -> (f64, f64, f64) {
        self.rows[j]
    }

    /// Applies the operator to a full grid function (including the boundary
    /// node); returns values at rows 0..M-1.
    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>, MeshError> {
        let m = self.rows.len();
        if values.len() != m + 1 {
            return Err(MeshError::Shape { got: values.len(), want: m + 1 });
        }
        let mut out = vec![0.0; m];
        let (_, d0, u0) = self.rows[0];
        out[0] = d0 * values[0] + u0 * values[1];
        for j in 1..m {
            let (lo, di, up) = self.rows[j];
            out[j] = lo * values[j - 1] + di * values[j] + up * values[j + 1];
        }
        Ok(out)
    }

    /// Row-wise sum of |coefficient| * |value|: the roundoff floor of the
    /// stencil evaluation, used to scale residual norms.
    pub fn apply_abs(&self, values: &[f64]) -> Result<Vec<f64>, MeshError> {
        let m = self.rows.len();
        if values.len() != m + 1 {
            return Err(MeshError::Shape { got: values.len(), want: m + 1 });
        }
        let mut out = vec![0.0; m];
        let (_, d0, u0) = self.rows[0];
        out[0] = d0.abs() * values[0].abs() + u0.abs() * values[1].abs();
        for j in 1..m {
            let (lo, di, up) = self.rows[j];
            out[j] = lo.abs() * values[j - 1].abs()
                + di.abs() * values[j].abs()
                + up.abs() * values[j + 1].abs();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_are_annihilated() {
        let mesh = RadialMesh::new(32, 3.5, 1.3).unwrap();
        let op = RadialLaplacian::new(&mesh);
        let ones = vec![2.5; mesh.len()];
        let out = op.apply(&ones).unwrap();
        for (j, v) in out.iter().enumerate() {
            assert!(v.abs() < 1e-9, "row {j}: {v}");
        }
    }

    /// The stencil is exact for quadratics: -Δ(1 - r²) = 2N at every row,
    /// including the one-sided center row.
    #[test]
    fn quadratic_is_exact() {
        for &(n, g) in &[(3.0, 1.0), (2.0, 1.0), (7.3, 1.5)] {
            let mesh = RadialMesh::new(64, n, g).unwrap();
            let op = RadialLaplacian::new(&mesh);
            let vals: Vec<f64> = mesh.nodes().iter().map(|r| 1.0 - r * r).collect();
            let out = op.apply(&vals).unwrap();
            for (j, v) in out.iter().enumerate() {
                assert_relative_eq!(*v, 2.0 * n, max_relative = 1e-8, epsilon = 1e-8);
                let _ = j;
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mesh = RadialMesh::new(16, 2.0, 1.0).unwrap();
        let op = RadialLaplacian::new(&mesh);
        assert!(op.apply(&vec![0.0; 5]).is_err());
    }
}
