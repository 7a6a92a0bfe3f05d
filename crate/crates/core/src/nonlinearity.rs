//! Nonlinearity families and their derivatives up to third order.
//!
//! All families satisfy f(0) = 1, f' > 0, f'' >= 0 (smooth, increasing,
//! convex, superlinear at infinity). Violations are rejected at
//! construction time for tabulated data.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NonlinearityError {
    #[error("power exponent must be > 1, got {0}")]
    BadExponent(f64),
    #[error("derivative order must be 0..=3, got {0}")]
    BadOrder(usize),
    #[error("argument {0} outside tabulated range [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    #[error("tabulated samples violate the growth conditions: {0}")]
    ConditionViolated(String),
    #[error("need at least 4 strictly increasing samples starting at t = 0 with value 1")]
    BadSamples,
}

/// Smooth nonlinearity with derivatives available up to third order.
#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// (1 + t)^p with p > 1.
    Power { exponent: f64 },
    /// e^t.
    Exponential,
    /// Cubic-spline interpolant of user samples; validated at load.
    Custom(Spline),
}

impl Nonlinearity {
    pub fn power(exponent: f64) -> Result<Self, NonlinearityError> {
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(NonlinearityError::BadExponent(exponent));
        }
        Ok(Nonlinearity::Power { exponent })
    }

    pub fn exponential() -> Self {
        Nonlinearity::Exponential
    }

    /// Builds a tabulated nonlinearity from (t, f(t)) samples.
    ///
    /// The sample grid must start at t = 0 with f(0) = 1. The interpolant is
    /// checked on the sample grid for f' > 0, f'' >= 0, and f(T)/T increasing
    /// on the upper half of the grid. `curvature_unbounded` is a declared
    /// flag (whether f'' -> infinity): it cannot be decided from finitely
    /// many samples.
    pub fn custom(samples: &[(f64, f64)], curvature_unbounded: bool) -> Result<Self, NonlinearityError> {
        let spline = Spline::fit(samples, curvature_unbounded)?;
        spline.validate()?;
        Ok(Nonlinearity::Custom(spline))
    }

    /// d^order/dt^order of the family at t.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64, NonlinearityError> {
        if order > 3 {
            return Err(NonlinearityError::BadOrder(order));
        }
        match self {
            Nonlinearity::Power { exponent: p } => {
                let mut coeff = 1.0;
                for k in 0..order {
                    coeff *= p - k as f64;
                }
                Ok(coeff * (1.0 + t).powf(p - order as f64))
            }
            Nonlinearity::Exponential => Ok(t.exp()),
            Nonlinearity::Custom(s) => s.eval(t, order),
        }
    }

    /// Whether f'' is declared to grow without bound.
    /// Exact for the closed-form kinds, declared by the user for tabulated data.
    pub fn curvature_unbounded(&self) -> bool {
        match self {
            Nonlinearity::Power { exponent } => *exponent > 2.0,
            Nonlinearity::Exponential => true,
            Nonlinearity::Custom(s) => s.curvature_unbounded,
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, Nonlinearity::Power { .. })
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, Nonlinearity::Exponential)
    }

    /// Power exponent, if this is the power kind.
    pub fn power_exponent(&self) -> Option<f64> {
        match self {
            Nonlinearity::Power { exponent } => Some(*exponent),
            _ => None,
        }
    }
}

/// Natural cubic spline through strictly increasing sample points.
#[derive(Debug, Clone)]
pub struct Spline {
    ts: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (natural boundary conditions).
    m2: Vec<f64>,
    curvature_unbounded: bool,
}

impl Spline {
    fn fit(samples: &[(f64, f64)], curvature_unbounded: bool) -> Result<Self, NonlinearityError> {
        if samples.len() < 4 {
            return Err(NonlinearityError::BadSamples);
        }
        if samples[0].0 != 0.0 || samples[0].1 != 1.0 {
            return Err(NonlinearityError::BadSamples);
        }
        let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NonlinearityError::BadSamples);
        }
        // Tridiagonal solve for natural-spline second derivatives.
        let n = ts.len();
        let mut sub = vec![0.0; n];
        let mut dia = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = ts[i] - ts[i - 1];
            let h1 = ts[i + 1] - ts[i];
            sub[i] = h0 / 6.0;
            dia[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = sub[i] / dia[i - 1];
            dia[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m2 = vec![0.0; n];
        m2[n - 1] = rhs[n - 1] / dia[n - 1];
        for i in (0..n - 1).rev() {
            m2[i] = (rhs[i] - sup[i] * m2[i + 1]) / dia[i];
        }
        Ok(Spline { ts, ys, m2, curvature_unbounded })
    }

    fn validate(&self) -> Result<(), NonlinearityError> {
        for (i, &t) in self.ts.iter().enumerate() {
            let d1 = self.eval(t, 1)?;
            if d1 <= 0.0 {
                return Err(NonlinearityError::ConditionViolated(format!(
                    "f'({t}) = {d1} is not positive"
                )));
            }
            let d2 = self.eval(t, 2)?;
            if d2 < -1e-10 * (1.0 + self.ys[i].abs()) {
                return Err(NonlinearityError::ConditionViolated(format!(
                    "f''({t}) = {d2} is negative"
                )));
            }
        }
        // Superlinearity proxy: f(T)/T increasing on the upper half of the grid.
        let half = self.ts.len() / 2;
        let mut last = f64::NEG_INFINITY;
        for i in half..self.ts.len() {
            if self.ts[i] <= 0.0 {
                continue;
            }
            let ratio = self.ys[i] / self.ts[i];
            if ratio < last - 1e-12 * last.abs() {
                return Err(NonlinearityError::ConditionViolated(format!(
                    "f(T)/T decreases at T = {}",
                    self.ts[i]
                )));
            }
            last = ratio;
        }
        Ok(())
    }

    fn eval(&self, t: f64, order: usize) -> Result<f64, NonlinearityError> {
        let (lo, hi) = (self.ts[0], *self.ts.last().unwrap());
        if t < lo || t > hi {
            return Err(NonlinearityError::OutOfRange(t, lo, hi));
        }
        let i = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i - 1,
        };
        let h = self.ts[i + 1] - self.ts[i];
        let a = (self.ts[i + 1] - t) / h;
        let b = (t - self.ts[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m2[i], self.m2[i + 1]);
        Ok(match order {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => (y1 - y0) / h + ((3.0 * b * b - 1.0) * m1 - (3.0 * a * a - 1.0) * m0) * h / 6.0,
            2 => a * m0 + b * m1,
            3 => (m1 - m0) / h,
            _ => return Err(NonlinearityError::BadOrder(order)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_values() {
        let f = Nonlinearity::power(3.0).unwrap();
        assert_eq!(f.eval(1.0, 0).unwrap(), 8.0);
        assert_eq!(f.eval(0.0, 1).unwrap(), 3.0);
        assert_eq!(f.eval(0.0, 0).unwrap(), 1.0);
        assert_relative_eq!(f.eval(1.0, 2).unwrap(), 3.0 * 2.0 * 2.0, max_relative = 1e-15);
    }

    #[test]
    fn exponential_values() {
        let f = Nonlinearity::exponential();
        for order in 0..=3 {
            assert_eq!(f.eval(0.0, order).unwrap(), 1.0);
        }
        assert_relative_eq!(f.eval(2.0, 3).unwrap(), 2.0f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(Nonlinearity::power(1.0).is_err());
        assert!(Nonlinearity::power(0.5).is_err());
        assert!(Nonlinearity::power(f64::NAN).is_err());
    }

    #[test]
    fn rejects_order_above_three() {
        let f = Nonlinearity::exponential();
        assert!(matches!(f.eval(1.0, 4), Err(NonlinearityError::BadOrder(4))));
    }

    /// Central finite differences of order-k eval match order-(k+1) eval on a
    /// log-spaced grid.
    #[test]
    fn derivative_consistency() {
        let fams = [Nonlinearity::power(3.0).unwrap(), Nonlinearity::power(1.7).unwrap(), Nonlinearity::exponential()];
        for f in &fams {
            for i in 0..40 {
                let t = 10.0_f64.powf(-3.0 + 4.0 * i as f64 / 39.0).min(10.0);
                for order in 0..3 {
                    let h = 1e-5 * (1.0 + t);
                    let fd = (f.eval(t + h, order).unwrap() - f.eval((t - h).max(0.0), order).unwrap())
                        / (t + h - (t - h).max(0.0));
                    let exact = f.eval(if t - h < 0.0 { (t + h) / 2.0 } else { t }, order + 1).unwrap();
                    assert_relative_eq!(fd, exact, max_relative = 1e-4);
                }
            }
        }
    }

    #[test]
    fn custom_spline_tracks_samples() {
        // sample e^t on [0, 4]
        let samples: Vec<(f64, f64)> = (0..=40).map(|i| {
            let t = i as f64 * 0.1;
            (t, t.exp())
        }).collect();
        let f = Nonlinearity::custom(&samples, true).unwrap();
        assert_eq!(f.eval(0.0, 0).unwrap(), 1.0);
        assert_relative_eq!(f.eval(1.55, 0).unwrap(), 1.55f64.exp(), max_relative = 1e-5);
        assert_relative_eq!(f.eval(1.55, 1).unwrap(), 1.55f64.exp(), max_relative = 1e-3);
        assert!(f.curvature_unbounded());
    }

    #[test]
    fn custom_spline_domain_error() {
        let samples: Vec<(f64, f64)> = (0..=10).map(|i| {
            let t = i as f64 * 0.5;
            (t, t.exp())
        }).collect();
        let f = Nonlinearity::custom(&samples, true).unwrap();
        assert!(matches!(f.eval(5.5, 0), Err(NonlinearityError::OutOfRange(..))));
        assert!(matches!(f.eval(-0.1, 0), Err(NonlinearityError::OutOfRange(..))));
    }

    #[test]
    fn custom_rejects_decreasing_samples() {
        // f' < 0 somewhere
        let samples = vec![(0.0, 1.0), (1.0, 2.0), (2.0, 1.5), (3.0, 4.0), (4.0, 9.0)];
        assert!(Nonlinearity::custom(&samples, false).is_err());
    }

    #[test]
    fn custom_rejects_bad_anchor() {
        let samples = vec![(0.1, 1.0), (1.0, 2.0), (2.0, 4.0), (3.0, 8.0)];
        assert!(matches!(Nonlinearity::custom(&samples, false), Err(NonlinearityError::BadSamples)));
        let samples = vec![(0.0, 1.5), (1.0, 2.0), (2.0, 4.0), (3.0, 8.0)];
        assert!(matches!(Nonlinearity::custom(&samples, false), Err(NonlinearityError::BadSamples)));
    }

    /// Spline derivative consistency away from the knots.
    #[test]
    fn custom_derivative_consistency_midintervals() {
        let samples: Vec<(f64, f64)> = (0..=50).map(|i| {
            let t = i as f64 * 0.2;
            (t, (1.0 + t).powi(3))
        }).collect();
        let f = Nonlinearity::custom(&samples, true).unwrap();
        for i in 1..49 {
            let t = (i as f64 + 0.5) * 0.2;
            let h = 0.02;
            for order in 0..3 {
                let fd = (f.eval(t + h, order).unwrap() - f.eval(t - h, order).unwrap()) / (2.0 * h);
                let exact = f.eval(t, order + 1).unwrap();
                // spline only approximates the cubic's derivatives; loose bound
                assert_relative_eq!(fd, exact, max_relative = 2e-2, epsilon = 1e-6);
            }
        }
    }
}
