//! Principal eigenpair of the coupled linearization and the stability
//! inequalities evaluated as numerical margins.
//!
//! Semi-stability of a minimal solution means there is a positive pair
//! (ζ, χ) and η >= 0 with
//!   -Δζ = λ ∂ᵤR₁ ζ + λ ∂ᵥR₁ χ + η ζ,
//!   -Δχ = γ ∂ᵤR₂ ζ + γ ∂ᵥR₂ χ + η χ.
//! η is identified here with the smallest-real eigenvalue of the block
//! linearized operator; the principal pair is the positive one.

use crate::linalg::LinalgError;
use crate::mesh::{MeshError, RadialMesh};
use crate::nonlinearity::NonlinearityError;
use crate::operator::RadialLaplacian;
use crate::solution::{SolutionPair, TestFunctionPair};
use crate::solver::assemble_jacobian;
use crate::system::{ParamPoint, SystemSpec, Variant};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Shape(#[from] MeshError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("inverse iteration stagnated after {0} iterations (last eta estimate {1:.6e})")]
    EigFailure(usize, f64),
    #[error("converged eigenvector changes sign: not the principal pair (coarse mesh or wrong branch)")]
    NotPrincipal,
    #[error("check requires variant {want}, spec is variant {got}")]
    VariantMismatch { want: Variant, got: Variant },
    #[error("test-function argument must lie in (0, 1/2), got {0}")]
    BadPivot(f64),
}

/// Principal eigenpair of the coupled linearization, normalized to
/// max ζ = 1, positive on the interior.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub eta: f64,
    pub zeta: Vec<f64>,
    pub chi: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Relative convergence tolerance on the eigenvalue estimate.
    pub tol: f64,
    pub max_iter: usize,
    /// Warm-start guess for η (e.g. from the previous branch point).
    pub eta_hint: Option<f64>,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions { tol: 1e-11, max_iter: 400, eta_hint: None }
    }
}

/// Principal Dirichlet eigenvalue of the scalar radial operator on the mesh,
/// by inverse power iteration.
pub fn principal_dirichlet_eigenvalue(mesh: &RadialMesh) -> Result<f64, StabilityError> {
    let op = RadialLaplacian::new(mesh);
    let m = mesh.cells();
    let mut a = crate::linalg::BandMatrix::zeros(m, 1, 1);
    for j in 0..m {
        let (lo, di, up) = op.row(j);
        a.add(j, j, di)?;
        if j > 0 {
            a.add(j, j - 1, lo)?;
        }
        if j + 1 < m {
            a.add(j, j + 1, up)?;
        }
    }
    let lu = a.clone().factor()?;
    let mut z = vec![1.0; m];
    let mut mu = 0.0;
    for _ in 0..200 {
        let w = lu.solve(&z)?;
        let num: f64 = z.iter().map(|x| x * x).sum();
        let den: f64 = z.iter().zip(&w).map(|(x, y)| x * y).sum();
        let mu_new = num / den;
        let scale = w.iter().cloned().fold(0.0f64, |acc, x| acc.max(x.abs()));
        z = w.iter().map(|x| x / scale).collect();
        if (mu_new - mu).abs() <= 1e-13 * mu_new.abs() {
            return Ok(mu_new);
        }
        mu = mu_new;
    }
    Ok(mu)
}

/// Smallest-real eigenvalue of the block linearization at a solution, by
/// shifted inverse power iteration with positivity projection.
pub fn principal_eigenpair(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    opts: &EigOptions,
) -> Result<Eigenpair, StabilityError> {
    mesh.check_shape(&sol.u)?;
    mesh.check_shape(&sol.v)?;
    let op = RadialLaplacian::new(mesh);
    let m = mesh.cells();
    let mu1 = principal_dirichlet_eigenvalue(mesh)?;
    let hint = opts.eta_hint.unwrap_or(0.5 * mu1);

    let mut shift = hint - 0.25 * mu1;
    for _attempt in 0..4 {
        match inverse_iteration(spec, &op, param, sol, shift, mu1, opts)? {
            IterationOutcome::Converged(pair) => return Ok(pair),
            IterationOutcome::WrongMode => {
                // converged to a sign-changing mode: shift further down
                shift -= mu1;
            }
            IterationOutcome::Stagnated(iters, last) => {
                if _attempt == 3 {
                    return Err(StabilityError::EigFailure(iters, last));
                }
                shift -= 0.5 * mu1;
            }
        }
    }
    let _ = m;
    Err(StabilityError::NotPrincipal)
}

enum IterationOutcome {
    Converged(Eigenpair),
    WrongMode,
    Stagnated(usize, f64),
}

fn inverse_iteration(
    spec: &SystemSpec,
    op: &RadialLaplacian,
    param: ParamPoint,
    sol: &SolutionPair,
    shift: f64,
    mu1: f64,
    opts: &EigOptions,
) -> Result<IterationOutcome, StabilityError> {
    let m = op.rows();
    let jac = assemble_jacobian(spec, op, param, &sol.u, &sol.v, shift)
        .map_err(|e| match e {
            crate::solver::SolveError::Nonlinearity(n) => StabilityError::Nonlinearity(n),
            crate::solver::SolveError::Linalg(l) => StabilityError::Linalg(l),
            crate::solver::SolveError::Shape(s) => StabilityError::Shape(s),
            _ => StabilityError::EigFailure(0, f64::NAN),
        })?;
    let lu = match jac.clone().factor() {
        Ok(lu) => lu,
        // shift exactly on an eigenvalue: nudge and report stagnation so the
        // caller lowers the shift
        Err(LinalgError::Singular(_)) => return Ok(IterationOutcome::Stagnated(0, shift)),
        Err(e) => return Err(e.into()),
    };

    let mut z = vec![1.0; 2 * m];
    let mut eta = f64::NAN;
    for it in 0..opts.max_iter {
        let w = lu.solve(&z)?;
        let num: f64 = z.iter().map(|x| x * x).sum();
        let den: f64 = z.iter().zip(&w).map(|(x, y)| x * y).sum();
        let theta = num / den; // -> eta - shift
        let eta_new = shift + theta;

        let scale = w.iter().cloned().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if !(scale > 0.0) || !scale.is_finite() {
            return Ok(IterationOutcome::Stagnated(it, eta_new));
        }
        // orient positive, then project onto the nonnegative cone
        let pos: f64 = w.iter().filter(|x| **x > 0.0).map(|x| x * x).sum();
        let neg: f64 = w.iter().filter(|x| **x < 0.0).map(|x| x * x).sum();
        let sign = if pos >= neg { 1.0 } else { -1.0 };
        let raw_min = w.iter().map(|x| sign * x / scale).fold(f64::INFINITY, f64::min);
        z = w.iter().map(|x| (sign * x / scale).max(0.0)).collect();
        if z.iter().all(|&x| x == 0.0) {
            return Ok(IterationOutcome::WrongMode);
        }

        if it >= 2 && (eta_new - eta).abs() <= opts.tol * (1.0 + eta_new.abs()) {
            // the raw iterate must already be one-signed
            if raw_min < -1e-8 {
                return Ok(IterationOutcome::WrongMode);
            }
            if eta_new - shift <= 1e-12 * mu1 {
                // converged onto the shift itself: ambiguous, lower the shift
                return Ok(IterationOutcome::Stagnated(it, eta_new));
            }
            let mut zeta = vec![0.0; m + 1];
            let mut chi = vec![0.0; m + 1];
            let zmax = z.iter().step_by(2).cloned().fold(0.0f64, f64::max);
            for j in 0..m {
                zeta[j] = z[2 * j] / zmax;
                chi[j] = z[2 * j + 1] / zmax;
            }
            return Ok(IterationOutcome::Converged(Eigenpair { eta: eta_new, zeta, chi }));
        }
        eta = eta_new;
    }
    Ok(IterationOutcome::Stagnated(opts.max_iter, eta))
}

/// Residual of the eigen-relation in the quadrature norm, relative to the
/// eigenpair's norm: ‖L(ζ,χ) - η (ζ,χ)‖ / ‖(ζ,χ)‖ scaled by the operator size.
pub fn eigen_residual(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    pair: &Eigenpair,
) -> Result<f64, StabilityError> {
    let op = RadialLaplacian::new(mesh);
    let m = op.rows();
    let jac = assemble_jacobian(spec, &op, param, &sol.u, &sol.v, 0.0).map_err(|e| match e {
        crate::solver::SolveError::Nonlinearity(n) => StabilityError::Nonlinearity(n),
        crate::solver::SolveError::Linalg(l) => StabilityError::Linalg(l),
        crate::solver::SolveError::Shape(s) => StabilityError::Shape(s),
        _ => StabilityError::EigFailure(0, f64::NAN),
    })?;
    let mut z = vec![0.0; 2 * m];
    for j in 0..m {
        z[2 * j] = pair.zeta[j];
        z[2 * j + 1] = pair.chi[j];
    }
    let jz = jac.mat_vec(&z)?;
    let w = mesh.weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..m {
        let ru = jz[2 * j] - pair.eta * pair.zeta[j];
        let rv = jz[2 * j + 1] - pair.eta * pair.chi[j];
        num += w[j] * (ru * ru + rv * rv);
        den += w[j] * (pair.zeta[j] * pair.zeta[j] + pair.chi[j] * pair.chi[j]);
    }
    let mu1 = principal_dirichlet_eigenvalue(mesh)?;
    Ok((num / den).sqrt() / (pair.eta.abs() + mu1))
}

fn require_variant(spec: &SystemSpec, want: Variant) -> Result<(), StabilityError> {
    if spec.variant != want {
        return Err(StabilityError::VariantMismatch { want, got: spec.variant });
    }
    Ok(())
}

/// Margin of the gradient-system stability inequality
///   ∫ f''(u) g(v) φ² + ∫ f(u) g''(v) ψ² + 2 ∫ f'(u) g'(v) φψ
///     <= (1/λ) ∫ |∇φ|² + (1/γ) ∫ |∇ψ|²
/// as RHS - LHS under mesh quadrature.
pub fn check_gra(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    t: &TestFunctionPair,
) -> Result<f64, StabilityError> {
    require_variant(spec, Variant::G)?;
    mesh.check_shape(&t.phi)?;
    mesh.check_shape(&t.psi)?;
    let w = mesh.weights();
    let dphi = mesh.derivative(&t.phi)?;
    let dpsi = mesh.derivative(&t.psi)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for j in 0..mesh.len() {
        let (u, v) = (sol.u[j], sol.v[j]);
        let fpp = spec.f.eval(u, 2)?;
        let f0 = spec.f.eval(u, 0)?;
        let fp = spec.f.eval(u, 1)?;
        let gpp = spec.g.eval(v, 2)?;
        let g0 = spec.g.eval(v, 0)?;
        let gp = spec.g.eval(v, 1)?;
        lhs += w[j]
            * (fpp * g0 * t.phi[j] * t.phi[j]
                + f0 * gpp * t.psi[j] * t.psi[j]
                + 2.0 * fp * gp * t.phi[j] * t.psi[j]);
        rhs += w[j] * (dphi[j] * dphi[j] / param.lambda + dpsi[j] * dpsi[j] / param.gamma);
    }
    Ok(rhs - lhs)
}

/// Margin of the Hamiltonian-system stability inequality
///   ∫ f'(u) g'(v) (φ² + ψ²) + 2 ∫ sqrt(f f'' g g'') φψ
///     <= (1/λ) ∫ |∇φ|² + (1/γ) ∫ |∇ψ|².
pub fn check_twist(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    t: &TestFunctionPair,
) -> Result<f64, StabilityError> {
    require_variant(spec, Variant::H)?;
    mesh.check_shape(&t.phi)?;
    mesh.check_shape(&t.psi)?;
    let w = mesh.weights();
    let dphi = mesh.derivative(&t.phi)?;
    let dpsi = mesh.derivative(&t.psi)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for j in 0..mesh.len() {
        let (u, v) = (sol.u[j], sol.v[j]);
        let fp = spec.f.eval(u, 1)?;
        let gp = spec.g.eval(v, 1)?;
        let cross = (spec.f.eval(u, 0)? * spec.f.eval(u, 2)? * spec.g.eval(v, 0)? * spec.g.eval(v, 2)?)
            .max(0.0)
            .sqrt();
        lhs += w[j]
            * (fp * gp * (t.phi[j] * t.phi[j] + t.psi[j] * t.psi[j])
                + 2.0 * cross * t.phi[j] * t.psi[j]);
        rhs += w[j] * (dphi[j] * dphi[j] / param.lambda + dpsi[j] * dpsi[j] / param.gamma);
    }
    Ok(rhs - lhs)
}

/// Margin of the nonlinearity-free radial stability estimate
///   (N-1) ∫ (u_r²/λ + v_r²/γ) φ² <= ∫ (u_r²/λ + v_r²/γ) |(rφ)'|²,
/// valid at semi-stable radial solutions of any variant.
pub fn check_radialstab(
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    phi: &[f64],
) -> Result<f64, StabilityError> {
    mesh.check_shape(phi)?;
    let w = mesh.weights();
    let n = mesh.dimension();
    let ur = mesh.derivative(&sol.u)?;
    let vr = mesh.derivative(&sol.v)?;
    let rphi: Vec<f64> = mesh.nodes().iter().zip(phi).map(|(r, p)| r * p).collect();
    let drphi = mesh.derivative(&rphi)?;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for j in 0..mesh.len() {
        let dens = ur[j] * ur[j] / param.lambda + vr[j] * vr[j] / param.gamma;
        lhs += w[j] * (n - 1.0) * dens * phi[j] * phi[j];
        rhs += w[j] * dens * drphi[j] * drphi[j];
    }
    Ok(rhs - lhs)
}

/// Piecewise test function used to localize the radial estimate near the
/// origin: constant r^{-s-1} on [0, r], t^{-s-1} on (r, 1/2], and a linear
/// ramp 2^{s+2}(1-t) on (1/2, 1], with s = sqrt(N-1). Continuous at both
/// junctions and zero at t = 1.
pub fn step3_testfn(dimension: f64, pivot: f64, mesh: &RadialMesh) -> Result<Vec<f64>, StabilityError> {
    if !(pivot > 0.0 && pivot < 0.5) {
        return Err(StabilityError::BadPivot(pivot));
    }
    let s = (dimension - 1.0).sqrt();
    Ok(mesh
        .nodes()
        .iter()
        .map(|&t| {
            if t <= pivot {
                pivot.powf(-s - 1.0)
            } else if t <= 0.5 {
                t.powf(-s - 1.0)
            } else {
                2.0f64.powf(s + 2.0) * (1.0 - t)
            }
        })
        .collect())
}

/// The localized gradient bound extracted from the piecewise test function:
/// returns (∫₀^pivot (u_r²/λ + v_r²/γ) t^{N-1} dt, bound) with
/// bound = 2^{2s+4}/(N-2) · pivot^{2s+2} · ∫_{1/2}^1 (u_r²/λ + v_r²/γ) t^{N-1} dt.
pub fn step3_bound(
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    pivot: f64,
) -> Result<(f64, f64), StabilityError> {
    if !(pivot > 0.0 && pivot < 0.5) {
        return Err(StabilityError::BadPivot(pivot));
    }
    let n = mesh.dimension();
    let s = (n - 1.0).sqrt();
    let ur = mesh.derivative(&sol.u)?;
    let vr = mesh.derivative(&sol.v)?;
    let dens: Vec<f64> = ur
        .iter()
        .zip(&vr)
        .map(|(a, b)| a * a / param.lambda + b * b / param.gamma)
        .collect();
    let window = mesh.integrate_window(&dens, 0.0, pivot)?;
    let annulus = mesh.integrate_window(&dens, 0.5, 1.0)?;
    let bound = 2.0f64.powf(2.0 * s + 4.0) / (n - 2.0) * pivot.powf(2.0 * s + 2.0) * annulus;
    Ok((window, bound))
}

/// Truncated sine series with seeded coefficients: dense in the
/// zero-boundary space, reproducible across runs.
pub fn random_sine_function<R: Rng>(mesh: &RadialMesh, rng: &mut R, modes: usize) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut vals: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|&r| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * r).sin())
                .sum()
        })
        .collect();
    *vals.last_mut().unwrap() = 0.0;
    vals
}

pub fn random_test_pair<R: Rng>(mesh: &RadialMesh, rng: &mut R, modes: usize) -> TestFunctionPair {
    TestFunctionPair {
        phi: random_sine_function(mesh, rng, modes),
        psi: random_sine_function(mesh, rng, modes),
    }
}
