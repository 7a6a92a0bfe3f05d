//! Compact banded matrices with LU factorization (partial pivoting).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("zero pivot at row {0}: matrix is singular to working precision")]
    Singular(usize),
    #[error("index ({0}, {1}) outside band (m1 = {2}, m2 = {3})")]
    OutOfBand(usize, usize, usize, usize),
    #[error("vector length {got} does not match matrix size {want}")]
    Shape { got: usize, want: usize },
}

/// n x n band matrix with m1 subdiagonals and m2 superdiagonals.
/// Row-major compact storage: entry (i, j) lives at column j - i + m1.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    m1: usize,
    m2: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, m1: usize, m2: usize) -> Self {
        BandMatrix { n, m1, m2, data: vec![0.0; n * (m1 + m2 + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Result<usize, LinalgError> {
        let mm = self.m1 + self.m2 + 1;
        if i >= self.n || j >= self.n || j + self.m1 < i || j > i + self.m2 {
            return Err(LinalgError::OutOfBand(i, j, self.m1, self.m2));
        }
        Ok(i * mm + (j + self.m1 - i))
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<(), LinalgError> {
        let s = self.slot(i, j)?;
        self.data[s] = value;
        Ok(())
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) -> Result<(), LinalgError> {
        let s = self.slot(i, j)?;
        self.data[s] += value;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.slot(i, j) {
            Ok(s) => self.data[s],
            Err(_) => 0.0,
        }
    }

    /// Adds s to every diagonal entry.
    pub fn shift_diagonal(&mut self, s: f64) {
        let mm = self.m1 + self.m2 + 1;
        for i in 0..self.n {
            self.data[i * mm + self.m1] += s;
        }
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::Shape { got: x.len(), want: self.n });
        }
        let mm = self.m1 + self.m2 + 1;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.m1);
            let jhi = (i + self.m2).min(self.n - 1);
            let mut acc = 0.0;
            for j in jlo..=jhi {
                acc += self.data[i * mm + (j + self.m1 - i)] * x[j];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// LU factorization with partial pivoting; consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu, LinalgError> {
        let (n, m1, m2) = (self.n, self.m1, self.m2);
        let mm = m1 + m2 + 1;
        let a = &mut self.data;
        // Left-shift the first m1 rows into lower-triangle-free layout.
        let mut l = m1;
        for i in 0..m1 {
            for j in (m1 - i)..mm {
                a[i * mm + j - l] = a[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                a[i * mm + j] = 0.0;
            }
        }
        let mut al = vec![0.0; n * m1];
        let mut pivots = vec![0usize; n];
        let mut l = m1;
        for k in 0..n {
            let mut dum = a[k * mm];
            let mut ip = k;
            if l < n {
                l += 1;
            }
            for j in (k + 1)..l {
                if a[j * mm].abs() > dum.abs() {
                    dum = a[j * mm];
                    ip = j;
                }
            }
            pivots[k] = ip;
            if dum == 0.0 {
                return Err(LinalgError::Singular(k));
            }
            if ip != k {
                for j in 0..mm {
                    a.swap(k * mm + j, ip * mm + j);
                }
            }
            for i in (k + 1)..l {
                let dum = a[i * mm] / a[k * mm];
                al[k * m1 + (i - k - 1)] = dum;
                for j in 1..mm {
                    a[i * mm + j - 1] = a[i * mm + j] - dum * a[k * mm + j];
                }
                a[i * mm + mm - 1] = 0.0;
            }
        }
        Ok(BandLu { n, m1, m2, upper: self.data, lower: al, pivots })
    }
}

/// Factored band matrix ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    m1: usize,
    m2: usize,
    upper: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<(), LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::Shape { got: b.len(), want: self.n });
        }
        let (n, m1, m2) = (self.n, self.m1, self.m2);
        let mm = m1 + m2 + 1;
        let mut l = m1;
        for k in 0..n {
            let j = self.pivots[k];
            if j != k {
                b.swap(k, j);
            }
            if l < n {
                l += 1;
            }
            for i in (k + 1)..l {
                b[i] -= self.lower[k * m1 + (i - k - 1)] * b[k];
            }
        }
        let mut l = 1;
        for i in (0..n).rev() {
            let mut dum = b[i];
            for k in 1..l {
                dum -= self.upper[i * mm + k] * b[i + k];
            }
            b[i] = dum / self.upper[i * mm];
            if l < mm {
                l += 1;
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(rng: &mut ChaCha8Rng, n: usize, m1: usize, m2: usize) -> (BandMatrix, DMatrix<f64>) {
        let mut band = BandMatrix::zeros(n, m1, m2);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(m1)..=(i + m2).min(n - 1) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                let v = if i == j { v + 4.0 } else { v };
                band.set(i, j, v).unwrap();
                dense[(i, j)] = v;
            }
        }
        (band, dense)
    }

    #[test]
    fn solve_matches_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, m1, m2) in &[(12usize, 1usize, 1usize), (30, 2, 2), (50, 3, 1)] {
            let (band, dense) = random_banded(&mut rng, n, m1, m2);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x_band = band.clone().factor().unwrap().solve(&b).unwrap();
            let x_dense = dense
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(&b))
                .unwrap();
            for i in 0..n {
                assert_relative_eq!(x_band[i], x_dense[i], max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mat_vec_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (band, dense) = random_banded(&mut rng, 20, 2, 2);
        let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = band.mat_vec(&x).unwrap();
        let yd = dense * nalgebra::DVector::from_column_slice(&x);
        for i in 0..20 {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let mut band = BandMatrix::zeros(4, 1, 1);
        // row of zeros
        band.set(0, 0, 1.0).unwrap();
        band.set(2, 2, 1.0).unwrap();
        band.set(3, 3, 1.0).unwrap();
        assert!(matches!(band.factor(), Err(LinalgError::Singular(_))));
    }

    #[test]
    fn out_of_band_rejected() {
        let mut band = BandMatrix::zeros(6, 1, 1);
        assert!(band.set(0, 3, 1.0).is_err());
    }

    #[test]
    fn pivoting_handles_small_leading_entries() {
        // without pivoting this would divide by 1e-20
        let mut band = BandMatrix::zeros(2, 1, 1);
        band.set(0, 0, 1e-20).unwrap();
        band.set(0, 1, 1.0).unwrap();
        band.set(1, 0, 1.0).unwrap();
        band.set(1, 1, 1.0).unwrap();
        let lu = band.factor().unwrap();
        let x = lu.solve(&[1.0, 2.0]).unwrap();
        // exact solution of [eps 1; 1 1] x = [1, 2] is x ~ [1, 1]
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-9);
        assert_relative_eq!(x[1], 1.0, max_relative = 1e-9);
    }
}
