//! Minimal-branch continuation along parameter rays and fold bracketing.
//!
//! The branch is walked in λ along the ray (λ, σλ): each accepted point warm
//! starts the next solve (secant-extrapolated through the last two accepted
//! points, falling back to the plain previous solution), step doubling on
//! easy convergence and halving on failure. The fold is located by shrinking
//! the bracket (λ_ok, λ_fail); a recorded failure is re-attempted from the
//! newest accepted solution before the bracket is declared converged, since
//! a failure far from the current point may be a basin artifact rather than
//! nonexistence.

use crate::mesh::RadialMesh;
use crate::solution::SolutionPair;
use crate::solver::{newton_solve, NewtonResult, SolveError, SolveOptions};
use crate::stability::{principal_dirichlet_eigenvalue, principal_eigenpair, EigOptions, StabilityError};
use crate::system::{ParamPoint, Ray, SystemSpec};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("no convergence at the starting parameter lambda0 = {lambda0}: {source}")]
    BadStart {
        lambda0: f64,
        #[source]
        source: SolveError,
    },
    #[error("branch is incomplete: {0}")]
    IncompleteBranch(&'static str),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("solve budget of {0} exhausted before the bracket converged")]
    Budget(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Starting parameter; probed automatically when absent.
    pub lambda0: Option<f64>,
    /// Initial step as a fraction of lambda0.
    pub initial_step_frac: f64,
    /// Bracket convergence threshold, relative to λ_ok.
    pub min_step_rel: f64,
    /// Newton solves allowed per ray.
    pub max_solves: usize,
    /// Iteration count at or below which a solve counts as easy (step doubles).
    pub easy_iters: usize,
    pub solve: SolveOptions,
    pub eig_tol_factor: f64,
    /// Compute the principal eigenvalue at every accepted point.
    pub compute_eta: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            lambda0: None,
            initial_step_frac: 0.25,
            min_step_rel: 1e-8,
            max_solves: 100_000,
            easy_iters: 6,
            solve: SolveOptions::default(),
            eig_tol_factor: 1e-8,
            compute_eta: true,
        }
    }
}

/// One accepted point of a minimal branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub sol: SolutionPair,
    pub residual_norm: f64,
    /// Principal eigenvalue of the coupled linearization (NaN when disabled).
    pub eta: f64,
    pub sup_u: f64,
    pub sup_v: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Fold {
    pub lambda_star: f64,
    /// (λ_ok, λ_fail): warm-started Newton succeeds at λ_ok, fails at λ_fail.
    pub bracket: (f64, f64),
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub ray: Ray,
    pub points: Vec<BranchPoint>,
    pub fold: Fold,
    /// μ₁ of the mesh, the scale for eigenvalue tolerances.
    pub mu1: f64,
    /// Set when some accepted point had η < -eig_tol (mesh too coarse).
    pub coarse_mesh: bool,
}

impl Branch {
    pub fn min_eta(&self) -> f64 {
        self.points.iter().map(|p| p.eta).fold(f64::INFINITY, f64::min)
    }

    pub fn last(&self) -> &BranchPoint {
        self.points.last().expect("branch has at least one point")
    }

    pub fn bracket_width(&self) -> f64 {
        self.fold.bracket.1 - self.fold.bracket.0
    }
}

/// Extremal-solution estimate: the last accepted minimal solution, tagged
/// with the fold bracket it was computed under.
#[derive(Debug, Clone)]
pub struct ExtremalEstimate {
    pub sol: SolutionPair,
    pub bracket: (f64, f64),
}

pub fn extremal_estimate(branch: &Branch) -> Result<ExtremalEstimate, TraceError> {
    if branch.points.len() < 3 {
        return Err(TraceError::IncompleteBranch("fewer than 3 accepted points"));
    }
    if !branch.fold.converged {
        return Err(TraceError::IncompleteBranch("fold bracket did not converge"));
    }
    Ok(ExtremalEstimate { sol: branch.last().sol.clone(), bracket: branch.fold.bracket })
}

/// Cold-start probe for a default λ0: double from 1e-3 until Newton from
/// zero first fails, then back off well below that failure.
fn probe_lambda0(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    sigma: f64,
    solve: &SolveOptions,
) -> Result<f64, TraceError> {
    let mut lambda = 1e-3;
    let zero_at = |lambda: f64| -> Result<ParamPoint, TraceError> {
        ParamPoint::on_ray(sigma, lambda).map_err(|_| TraceError::IncompleteBranch("bad sigma"))
    };
    let p0 = zero_at(lambda)?;
    let init = SolutionPair::zero(mesh, p0);
    loop {
        let p = zero_at(lambda)?;
        match newton_solve(spec, mesh, p, &init, solve) {
            Ok(_) => {
                lambda *= 2.0;
                if lambda > 1e6 {
                    return Ok(0.05 * lambda);
                }
            }
            Err(SolveError::NonConvergence { .. }) | Err(SolveError::NotMinimalCandidate(_)) => {
                return Ok(0.05 * lambda)
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Traces the minimal branch along the ray (λ, σλ) and brackets its fold.
pub fn trace_ray(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    sigma: f64,
    opts: &TraceOptions,
) -> Result<Branch, TraceError> {
    let mu1 = principal_dirichlet_eigenvalue(mesh)?;
    let eig_tol = opts.eig_tol_factor * mu1;
    let lambda0 = match opts.lambda0 {
        Some(l) => l,
        None => probe_lambda0(spec, mesh, sigma, &opts.solve)?,
    };

    let p0 = ParamPoint::on_ray(sigma, lambda0)
        .map_err(|_| TraceError::IncompleteBranch("bad sigma or lambda0"))?;
    let init = SolutionPair::zero(mesh, p0);
    let first = newton_solve(spec, mesh, p0, &init, &opts.solve)
        .map_err(|source| TraceError::BadStart { lambda0, source })?;

    let mut points: Vec<BranchPoint> = Vec::new();
    let mut coarse_mesh = false;
    let mut eta_hint = 0.5 * mu1;
    let push_point = |res: NewtonResult,
                          points: &mut Vec<BranchPoint>,
                          coarse: &mut bool,
                          hint: &mut f64|
     -> Result<(), TraceError> {
        let eta = if opts.compute_eta {
            let pair = principal_eigenpair(
                spec,
                mesh,
                res.sol.param,
                &res.sol,
                &EigOptions { eta_hint: Some(*hint), ..EigOptions::default() },
            )?;
            *hint = pair.eta;
            pair.eta
        } else {
            f64::NAN
        };
        if opts.compute_eta && eta < -eig_tol {
            *coarse = true;
        }
        points.push(BranchPoint {
            sup_u: res.sol.sup_u(),
            sup_v: res.sol.sup_v(),
            sol: res.sol,
            residual_norm: res.residual_norm,
            eta,
        });
        Ok(())
    };
    push_point(first, &mut points, &mut coarse_mesh, &mut eta_hint)?;

    let mut lambda_ok = lambda0;
    let mut step = opts.initial_step_frac * lambda0;
    let mut lambda_fail = f64::INFINITY;
    let mut solves = 0usize;
    let mut converged = false;

    // attempt a solve at lambda_try, secant-predicted then plain warm start
    let attempt = |lambda_try: f64,
                   points: &[BranchPoint],
                   solves: &mut usize|
     -> Result<Option<NewtonResult>, TraceError> {
        let p = ParamPoint::on_ray(sigma, lambda_try)
            .map_err(|_| TraceError::IncompleteBranch("bad lambda during trace"))?;
        let last = &points[points.len() - 1].sol;
        let mut inits: Vec<SolutionPair> = Vec::with_capacity(2);
        if points.len() >= 2 {
            let prev = &points[points.len() - 2].sol;
            let dl = last.param.lambda - prev.param.lambda;
            if dl > 0.0 {
                let f = ((lambda_try - last.param.lambda) / dl).min(10.0);
                let u: Vec<f64> =
                    last.u.iter().zip(&prev.u).map(|(a, b)| a + f * (a - b)).collect();
                let v: Vec<f64> =
                    last.v.iter().zip(&prev.v).map(|(a, b)| a + f * (a - b)).collect();
                if u.iter().chain(&v).all(|x| x.is_finite()) {
                    inits.push(SolutionPair { u, v, param: p });
                }
            }
        }
        inits.push(SolutionPair { u: last.u.clone(), v: last.v.clone(), param: p });
        for init in &inits {
            *solves += 1;
            match newton_solve(spec, mesh, p, init, &opts.solve) {
                Ok(res) => return Ok(Some(res)),
                Err(SolveError::NonConvergence { .. }) | Err(SolveError::NotMinimalCandidate(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(None)
    };

    while solves < opts.max_solves {
        if lambda_fail - lambda_ok <= opts.min_step_rel * lambda_ok {
            // the recorded failure may be stale: re-attempt it from the
            // newest accepted solution before finalizing the bracket
            match attempt(lambda_fail, &points, &mut solves)? {
                Some(res) => {
                    lambda_ok = lambda_fail;
                    lambda_fail = f64::INFINITY;
                    step = step.max(4.0 * opts.min_step_rel * lambda_ok);
                    push_point(res, &mut points, &mut coarse_mesh, &mut eta_hint)?;
                    continue;
                }
                None => {
                    converged = true;
                    break;
                }
            }
        }
        let mut lambda_try = lambda_ok + step;
        if lambda_fail.is_finite() && lambda_try >= lambda_fail {
            lambda_try = 0.5 * (lambda_ok + lambda_fail);
        }
        if lambda_try <= lambda_ok {
            // step underflowed relative to lambda_ok
            converged = lambda_fail.is_finite();
            break;
        }
        match attempt(lambda_try, &points, &mut solves)? {
            Some(res) => {
                lambda_ok = lambda_try;
                let easy = res.iterations <= opts.easy_iters;
                push_point(res, &mut points, &mut coarse_mesh, &mut eta_hint)?;
                if easy {
                    step *= 2.0;
                }
            }
            None => {
                lambda_fail = lambda_try;
                step *= 0.5;
            }
        }
    }
    if !converged && solves >= opts.max_solves && !lambda_fail.is_finite() {
        return Err(TraceError::Budget(opts.max_solves));
    }

    let bracket = (lambda_ok, if lambda_fail.is_finite() { lambda_fail } else { lambda_ok });
    let fold = Fold {
        lambda_star: 0.5 * (bracket.0 + bracket.1),
        bracket,
        converged,
    };
    let ray = Ray::new(sigma, lambda0, bracket.1)
        .map_err(|_| TraceError::IncompleteBranch("bad sigma"))?;
    Ok(Branch { ray, points, fold, mu1, coarse_mesh })
}

/// One sample of the extremal curve.
#[derive(Debug, Clone, Copy)]
pub struct UpsilonPoint {
    pub lambda_star: f64,
    pub gamma_star: f64,
    pub bracket_width: f64,
}

#[derive(Debug)]
pub struct UpsilonSample {
    pub sigma: f64,
    pub result: Result<UpsilonPoint, TraceError>,
}

/// Sampled extremal curve (λ*(σ), γ*(σ)).
#[derive(Debug)]
pub struct UpsilonCurve {
    pub samples: Vec<UpsilonSample>,
}

/// Traces one ray per σ (in parallel) and assembles the curve sorted by σ.
/// Per-ray failures are recorded as failed samples without aborting the sweep.
pub fn trace_upsilon(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    sigmas: &[f64],
    opts: &TraceOptions,
) -> UpsilonCurve {
    let mut samples: Vec<UpsilonSample> = sigmas
        .par_iter()
        .map(|&sigma| {
            let result = trace_ray(spec, mesh, sigma, opts).map(|branch| UpsilonPoint {
                lambda_star: branch.fold.lambda_star,
                gamma_star: sigma * branch.fold.lambda_star,
                bracket_width: branch.bracket_width(),
            });
            UpsilonSample { sigma, result }
        })
        .collect();
    samples.sort_by(|a, b| a.sigma.partial_cmp(&b.sigma).unwrap());
    UpsilonCurve { samples }
}
