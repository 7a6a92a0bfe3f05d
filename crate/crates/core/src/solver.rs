//! Damped Newton solver for the coupled system at a fixed parameter point.
//!
//! Unknowns are the nodal values of (u, v) at nodes 0..M-1, interleaved as
//! [u₀, v₀, u₁, v₁, …]; the boundary node is eliminated by the Dirichlet
//! condition. Convergence is measured in a row-scaled residual max-norm:
//! each row is divided by 1 + Σ|stencil·value| + |rhs term|, the roundoff
//! floor of that row's evaluation. An absolute norm stalls above machine
//! precision once the center-row stencil coefficients reach 1/r₁².

use crate::linalg::{BandMatrix, LinalgError};
use crate::mesh::{MeshError, RadialMesh};
use crate::nonlinearity::NonlinearityError;
use crate::operator::RadialLaplacian;
use crate::solution::{SolutionError, SolutionPair};
use crate::system::{ParamPoint, SystemSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Shape(#[from] MeshError),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("initial guess violates the boundary condition: u(1) = {0}, v(1) = {1}")]
    BadInit(f64, f64),
    #[error("Newton did not converge: scaled residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("converged iterate is not a minimal-solution candidate: {0}")]
    NotMinimalCandidate(#[from] SolutionError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Row-scaled residual max-norm tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings per line search.
    pub max_halvings: usize,
    /// Reject converged iterates that are negative or not radially decreasing.
    pub require_minimal_shape: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 50, max_halvings: 20, require_minimal_shape: true }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub sol: SolutionPair,
    /// Row-scaled residual max-norm at acceptance.
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Residual of the coupled system at interior rows 0..M-1:
/// ((-Δu)ⱼ - λ R₁(uⱼ, vⱼ), (-Δv)ⱼ - γ R₂(uⱼ, vⱼ)).
pub fn residual(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    u: &[f64],
    v: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let op = RadialLaplacian::new(mesh);
    let eval = eval_residual(spec, mesh, &op, param, u, v)?;
    let (ru, rv) = eval.parts.ok_or(SolveError::NonConvergence { residual: f64::INFINITY, iterations: 0 })?;
    Ok((ru, rv))
}

struct ResidualEval {
    /// None when a right-hand side overflowed or left a tabulated domain.
    parts: Option<(Vec<f64>, Vec<f64>)>,
    norm: f64,
}

fn eval_residual(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    op: &RadialLaplacian,
    param: ParamPoint,
    u: &[f64],
    v: &[f64],
) -> Result<ResidualEval, SolveError> {
    mesh.check_shape(u)?;
    mesh.check_shape(v)?;
    let m = mesh.cells();
    let au = op.apply(u)?;
    let av = op.apply(v)?;
    let au_abs = op.apply_abs(u)?;
    let av_abs = op.apply_abs(v)?;
    let mut ru = vec![0.0; m];
    let mut rv = vec![0.0; m];
    let mut norm: f64 = 0.0;
    for j in 0..m {
        let rhs = match spec.rhs(u[j], v[j]) {
            Ok(r) => r,
            Err(NonlinearityError::OutOfRange(..)) => {
                return Ok(ResidualEval { parts: None, norm: f64::INFINITY })
            }
            Err(e) => return Err(e.into()),
        };
        let fu = param.lambda * rhs.r1;
        let fv = param.gamma * rhs.r2;
        ru[j] = au[j] - fu;
        rv[j] = av[j] - fv;
        let su = 1.0 + au_abs[j] + fu.abs();
        let sv = 1.0 + av_abs[j] + fv.abs();
        norm = norm.max((ru[j] / su).abs()).max((rv[j] / sv).abs());
    }
    if !norm.is_finite() {
        return Ok(ResidualEval { parts: None, norm: f64::INFINITY });
    }
    Ok(ResidualEval { parts: Some((ru, rv)), norm })
}

/// Exact Fréchet derivative of the residual with respect to (u, v), as a
/// band matrix (bandwidth 2) over the interleaved unknowns.
pub fn jacobian(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    u: &[f64],
    v: &[f64],
) -> Result<BandMatrix, SolveError> {
    mesh.check_shape(u)?;
    mesh.check_shape(v)?;
    let op = RadialLaplacian::new(mesh);
    assemble_jacobian(spec, &op, param, u, v, 0.0)
}

pub(crate) fn assemble_jacobian(
    spec: &SystemSpec,
    op: &RadialLaplacian,
    param: ParamPoint,
    u: &[f64],
    v: &[f64],
    diagonal_shift: f64,
) -> Result<BandMatrix, SolveError> {
    let m = op.rows();
    let mut jac = BandMatrix::zeros(2 * m, 2, 2);
    for j in 0..m {
        let parts = spec.rhs_partials(u[j], v[j])?;
        let (lo, di, up) = op.row(j);
        let iu = 2 * j;
        let iv = 2 * j + 1;
        jac.add(iu, iu, di - param.lambda * parts.d1_du - diagonal_shift)?;
        jac.add(iv, iv, di - param.gamma * parts.d2_dv - diagonal_shift)?;
        jac.add(iu, iv, -param.lambda * parts.d1_dv)?;
        jac.add(iv, iu, -param.gamma * parts.d2_du)?;
        if j > 0 {
            jac.add(iu, iu - 2, lo)?;
            jac.add(iv, iv - 2, lo)?;
        }
        if j + 1 < m {
            jac.add(iu, iu + 2, up)?;
            jac.add(iv, iv + 2, up)?;
        }
    }
    Ok(jac)
}

/// Damped Newton iteration from `init`, holding (λ, γ) fixed.
///
/// The step is halved while the scaled residual norm fails to decrease.
/// A converged iterate is additionally required to be nonnegative and
/// radially decreasing (minimal-solution shape) unless disabled.
pub fn newton_solve(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    init: &SolutionPair,
    opts: &SolveOptions,
) -> Result<NewtonResult, SolveError> {
    mesh.check_shape(&init.u)?;
    mesh.check_shape(&init.v)?;
    let bu = *init.u.last().unwrap();
    let bv = *init.v.last().unwrap();
    if bu.abs() > 1e-12 || bv.abs() > 1e-12 {
        return Err(SolveError::BadInit(bu, bv));
    }
    let op = RadialLaplacian::new(mesh);
    let m = mesh.cells();
    let mut u = init.u.clone();
    let mut v = init.v.clone();
    u[m] = 0.0;
    v[m] = 0.0;

    let mut eval = eval_residual(spec, mesh, &op, param, &u, &v)?;
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        if eval.norm <= opts.tol {
            break;
        }
        let (ru, rv) = match &eval.parts {
            Some(p) => p,
            None => {
                return Err(SolveError::NonConvergence { residual: f64::INFINITY, iterations })
            }
        };
        let jac = assemble_jacobian(spec, &op, param, &u, &v, 0.0)?;
        let lu = match jac.factor() {
            Ok(lu) => lu,
            Err(LinalgError::Singular(_)) => {
                return Err(SolveError::NonConvergence { residual: eval.norm, iterations })
            }
            Err(e) => return Err(e.into()),
        };
        let mut step = vec![0.0; 2 * m];
        for j in 0..m {
            step[2 * j] = ru[j];
            step[2 * j + 1] = rv[j];
        }
        lu.solve_in_place(&mut step)?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut un = u.clone();
            let mut vn = v.clone();
            for j in 0..m {
                un[j] -= t * step[2 * j];
                vn[j] -= t * step[2 * j + 1];
            }
            let trial = eval_residual(spec, mesh, &op, param, &un, &vn)?;
            if trial.norm < eval.norm {
                accepted = Some((un, vn, trial));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((un, vn, trial)) => {
                u = un;
                v = vn;
                eval = trial;
                iterations += 1;
            }
            None => return Err(SolveError::NonConvergence { residual: eval.norm, iterations }),
        }
    }
    if eval.norm > opts.tol {
        return Err(SolveError::NonConvergence { residual: eval.norm, iterations });
    }
    let sol = SolutionPair { u, v, param };
    if opts.require_minimal_shape {
        sol.check_minimal_shape(mesh, 1e-9)?;
    }
    Ok(NewtonResult { sol, residual_norm: eval.norm, iterations })
}

/// Minimal branch of the scalar disk problem -Δw = λ e^w (closed form used
/// by tests and calibration): w(r; b) = 2 log((1+b)/(1+b r²)), λ(b) = 8b/(1+b)².
/// Returns the minimal-root profile parameter b for λ < 2.
pub fn disk_exponential_profile(lambda: f64) -> Option<f64> {
    if !(0.0 < lambda && lambda < 2.0) {
        return None;
    }
    // λ b² + (2λ-8) b + λ = 0, minimal root
    let disc = (2.0 * lambda - 8.0) * (2.0 * lambda - 8.0) - 4.0 * lambda * lambda;
    Some(((8.0 - 2.0 * lambda) - disc.sqrt()) / (2.0 * lambda))
}
