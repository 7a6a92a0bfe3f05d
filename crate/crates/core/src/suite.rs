//! Verdict assembly for a completed branch: every applicable margin check
//! and threshold condition, with one row per named check.

use crate::continuation::Branch;
use crate::mesh::RadialMesh;
use crate::stability::{
    check_gra, check_radialstab, check_twist, random_test_pair, step3_bound, step3_testfn,
    StabilityError,
};
use crate::system::{SystemSpec, Variant};
use crate::verify::{
    check_pointwise_g, check_pointwise_h, check_power_moments, check_stabpol, threshold_report,
    VerifyError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("branch has no accepted points")]
    EmptyBranch,
}

/// One row of the verdict table.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub name: String,
    /// Numeric margin or slack, oriented so that positive passes.
    pub margin: f64,
    pub pass: bool,
    /// Whether the sign of this margin is guaranteed for semi-stable
    /// minimal solutions (a failure then indicates a real violation).
    pub guaranteed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random test-function pairs per branch point.
    pub pairs: usize,
    pub sine_modes: usize,
    /// Relative quadrature tolerance: margins are accepted down to
    /// -quad_tol_rel * |RHS|.
    pub quad_tol_rel: f64,
    /// Pointwise slack tolerance.
    pub pointwise_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            pairs: 100,
            sine_modes: 5,
            quad_tol_rel: 1e-6,
            pointwise_tol: 1e-8,
        }
    }
}

/// Runs every check applicable to the spec on a completed branch.
pub fn run_suite(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    branch: &Branch,
    opts: &SuiteOptions,
) -> Result<Vec<SuiteEntry>, SuiteError> {
    if branch.points.is_empty() {
        return Err(SuiteError::EmptyBranch);
    }
    let mut entries = Vec::new();
    let sigma = branch.ray.sigma;

    // semi-stability along the branch
    let eta_floor = 1e-6 * branch.mu1;
    let min_eta = branch.min_eta();
    entries.push(SuiteEntry {
        name: "eta_min".into(),
        margin: min_eta + eta_floor,
        pass: min_eta >= -eta_floor,
        guaranteed: true,
    });
    // fold crossing: eta at the bracket endpoint, tolerance scaled by the
    // bracket width
    let last = branch.last();
    let w_rel = branch.bracket_width() / branch.fold.bracket.0;
    let fold_tol = 10.0 * branch.mu1 * w_rel.max(0.0).sqrt();
    entries.push(SuiteEntry {
        name: "eta_fold".into(),
        margin: fold_tol - last.eta.abs(),
        pass: last.eta.abs() <= fold_tol,
        guaranteed: branch.fold.converged,
    });

    // stability-inequality sweeps over seeded sine pairs at every point
    let mut gra_worst: Option<(f64, bool)> = None;
    let mut twist_worst: Option<(f64, bool)> = None;
    let mut radial_worst: Option<(f64, bool)> = None;
    for (idx, pt) in branch.points.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(idx as u64));
        let param = pt.sol.param;
        for _ in 0..opts.pairs {
            let pair = random_test_pair(mesh, &mut rng, opts.sine_modes);
            let rhs_scale = rhs_energy(mesh, param.lambda, param.gamma, &pair.phi, &pair.psi)?;
            let tol = opts.quad_tol_rel * rhs_scale;
            match spec.variant {
                Variant::G => {
                    let m = check_gra(spec, mesh, param, &pt.sol, &pair)?;
                    fold_worst(&mut gra_worst, m, m >= -tol);
                }
                Variant::H => {
                    let m = check_twist(spec, mesh, param, &pt.sol, &pair)?;
                    fold_worst(&mut twist_worst, m, m >= -tol);
                }
                Variant::E => {}
            }
            let m = check_radialstab(mesh, param, &pt.sol, &pair.phi)?;
            let rhs_scale = radial_rhs(mesh, param.lambda, param.gamma, &pt.sol, &pair.phi)?;
            fold_worst(&mut radial_worst, m, m >= -opts.quad_tol_rel * rhs_scale);
        }
    }
    if let Some((margin, pass)) = gra_worst {
        entries.push(SuiteEntry { name: "gra_sweep".into(), margin, pass, guaranteed: true });
    }
    if let Some((margin, pass)) = twist_worst {
        entries.push(SuiteEntry { name: "twist_sweep".into(), margin, pass, guaranteed: true });
    }
    if let Some((margin, pass)) = radial_worst {
        entries.push(SuiteEntry { name: "radialstab_sweep".into(), margin, pass, guaranteed: true });
    }

    // localized radial bound with the piecewise test function
    {
        let pivot = 0.1;
        let phi = step3_testfn(mesh.dimension(), pivot, mesh)?;
        let mut worst = f64::INFINITY;
        let mut pass = true;
        let mut bound_pass = true;
        let mut bound_worst = f64::INFINITY;
        for pt in &branch.points {
            let param = pt.sol.param;
            let m = check_radialstab(mesh, param, &pt.sol, &phi)?;
            let rhs_scale = radial_rhs(mesh, param.lambda, param.gamma, &pt.sol, &phi)?;
            if m < worst {
                worst = m;
            }
            pass &= m >= -opts.quad_tol_rel * rhs_scale;
            if mesh.dimension() > 2.0 {
                let (window, bound) = step3_bound(mesh, param, &pt.sol, pivot)?;
                let margin = 2.0 * bound - window;
                if margin < bound_worst {
                    bound_worst = margin;
                }
                bound_pass &= margin >= 0.0;
            }
        }
        entries.push(SuiteEntry { name: "radialstab_step3".into(), margin: worst, pass, guaranteed: true });
        if mesh.dimension() > 2.0 {
            entries.push(SuiteEntry {
                name: "step3_window_bound".into(),
                margin: bound_worst,
                pass: bound_pass,
                guaranteed: true,
            });
        }
    }

    // pointwise comparisons for power kinds (hypothesis permitting)
    if spec.variant == Variant::G && spec.power_exponents().is_some() {
        let (p, q) = spec.power_exponents().unwrap();
        if last.sol.param.lambda * p >= last.sol.param.gamma * q {
            let mut worst = f64::INFINITY;
            for pt in &branch.points {
                let (s1, s2) = check_pointwise_g(spec, &pt.sol, pt.sol.param)?;
                worst = worst.min(s1).min(s2);
            }
            entries.push(SuiteEntry {
                name: "pointwise_order".into(),
                margin: worst,
                pass: worst >= -opts.pointwise_tol,
                guaranteed: true,
            });
        }
    }
    if spec.variant == Variant::H && spec.power_exponents().is_some() {
        let (p, q) = spec.power_exponents().unwrap();
        if q * last.sol.param.lambda >= last.sol.param.gamma * p {
            let mut worst = f64::INFINITY;
            for pt in &branch.points {
                worst = worst.min(check_pointwise_h(spec, &pt.sol, pt.sol.param)?);
            }
            entries.push(SuiteEntry {
                name: "pointwise_order".into(),
                margin: worst,
                pass: worst >= -opts.pointwise_tol,
                guaranteed: true,
            });
        }
    }

    // energy inequality at sample exponents along the branch (gradient kind)
    if spec.variant == Variant::G && spec.power_exponents().is_some() {
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for pt in &branch.points {
            for &(s, t) in &[(1.5, 1.5), (2.0, 2.0)] {
                let m = check_stabpol(spec, mesh, pt.sol.param, &pt.sol, s, t)?;
                // scale: the RHS moments are bounded by the largest term
                let tol = opts.quad_tol_rel * m.abs().max(1.0);
                if m < worst {
                    worst = m;
                }
                pass &= m >= -tol;
            }
        }
        entries.push(SuiteEntry { name: "stabpol_margin".into(), margin: worst, pass, guaranteed: true });
    }

    // uniform moment bounds along the branch (Hamiltonian kind)
    if spec.variant == Variant::H && spec.power_exponents().is_some() {
        let report = check_power_moments(spec, mesh, branch, 1.5, 1.5);
        match report {
            Ok(rep) => {
                let growth = rep.growth_first.max(rep.growth_second);
                entries.push(SuiteEntry {
                    name: "moment_growth".into(),
                    margin: 10.0 - growth,
                    pass: growth <= 10.0,
                    guaranteed: true,
                });
                entries.push(SuiteEntry {
                    name: "moment_cauchy_schwarz".into(),
                    margin: -rep.max_cross_excess,
                    pass: rep.max_cross_excess <= 1e-12,
                    guaranteed: true,
                });
            }
            Err(VerifyError::Domain(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }

    // closed-form threshold conditions at the fold estimate
    if let Some((p, q)) = spec.power_exponents() {
        let lambda_star = branch.fold.lambda_star;
        let report = threshold_report(p, q, lambda_star, sigma * lambda_star, mesh.dimension())?;
        for (name, verdict) in [
            ("dim_bound_t0", report.dim_t0),
            ("dim_bound_root", report.dim_root),
            ("param_cone", report.cone),
            ("dim_bound_h", report.dim_h),
            ("exp_ratio_window", report.exp_ratio),
        ] {
            if verdict.applicable {
                entries.push(SuiteEntry {
                    name: name.into(),
                    margin: verdict.slack,
                    pass: verdict.pass,
                    guaranteed: false,
                });
            }
        }
    } else if spec.variant == Variant::E {
        let lambda_star = branch.fold.lambda_star;
        let n = mesh.dimension();
        let ratio = sigma;
        let lo = (n - 2.0) / 8.0;
        let hi = 8.0 / (n - 2.0);
        let slack = (ratio - lo).min(hi - ratio);
        entries.push(SuiteEntry {
            name: "exp_ratio_window".into(),
            margin: slack,
            pass: slack > 1e-12,
            guaranteed: false,
        });
        let _ = lambda_star;
    }

    Ok(entries)
}

fn fold_worst(acc: &mut Option<(f64, bool)>, margin: f64, pass: bool) {
    match acc {
        Some((m, p)) => {
            if margin < *m {
                *m = margin;
            }
            *p &= pass;
        }
        None => *acc = Some((margin, pass)),
    }
}

/// (1/λ)∫|∇φ|² + (1/γ)∫|∇ψ|²: the scale against which quadrature margins
/// are measured.
fn rhs_energy(
    mesh: &RadialMesh,
    lambda: f64,
    gamma: f64,
    phi: &[f64],
    psi: &[f64],
) -> Result<f64, StabilityError> {
    let dphi = mesh.derivative(phi)?;
    let dpsi = mesh.derivative(psi)?;
    let w = mesh.weights();
    let mut rhs = 0.0;
    for j in 0..mesh.len() {
        rhs += w[j] * (dphi[j] * dphi[j] / lambda + dpsi[j] * dpsi[j] / gamma);
    }
    Ok(rhs)
}

fn radial_rhs(
    mesh: &RadialMesh,
    lambda: f64,
    gamma: f64,
    sol: &crate::solution::SolutionPair,
    phi: &[f64],
) -> Result<f64, StabilityError> {
    let ur = mesh.derivative(&sol.u)?;
    let vr = mesh.derivative(&sol.v)?;
    let rphi: Vec<f64> = mesh.nodes().iter().zip(phi).map(|(r, p)| r * p).collect();
    let drphi = mesh.derivative(&rphi)?;
    let w = mesh.weights();
    let mut rhs = 0.0;
    for j in 0..mesh.len() {
        let dens = ur[j] * ur[j] / lambda + vr[j] * vr[j] / gamma;
        rhs += w[j] * dens * drphi[j] * drphi[j];
    }
    Ok(rhs)
}
