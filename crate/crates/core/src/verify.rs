//! Closed-form thresholds, comparison checks, and integral estimates for
//! power and exponential nonlinearities, evaluated against computed branches.

use crate::continuation::{extremal_estimate, Branch, TraceError};
use crate::mesh::{MeshError, RadialMesh};
use crate::solution::SolutionPair;
use crate::system::{ParamPoint, SystemSpec, Variant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("hypothesis not met: {0} (value {1:.6e})")]
    HypothesisNotMet(&'static str, f64),
    #[error("no sign change found up to t = {0:.3e}")]
    NoRoot(f64),
    #[error("the root map is not decreasing on the bracket (at t = {0})")]
    NotDecreasing(f64),
    #[error("check requires variant {want} with power nonlinearities")]
    NeedsPowerVariant { want: Variant },
    #[error(transparent)]
    Shape(#[from] MeshError),
    #[error("incomplete branch: {0}")]
    Branch(String),
}

impl From<TraceError> for VerifyError {
    fn from(e: TraceError) -> Self {
        VerifyError::Branch(e.to_string())
    }
}

/// Strict-inequality verdicts carry the numeric slack by which the
/// condition holds (positive) or fails (negative). Equality within 1e-12 is
/// reported as a failure with zero slack.
#[derive(Debug, Clone, Copy)]
pub struct Verdict {
    pub applicable: bool,
    pub pass: bool,
    pub slack: f64,
}

impl Verdict {
    fn strict(slack: f64) -> Verdict {
        if slack.abs() <= 1e-12 {
            Verdict { applicable: true, pass: false, slack: 0.0 }
        } else {
            Verdict { applicable: true, pass: slack > 0.0, slack }
        }
    }

    fn not_applicable() -> Verdict {
        Verdict { applicable: false, pass: false, slack: f64::NAN }
    }
}

/// t₊(p) = p + sqrt(p(p-1)): the exponent threshold below which energy
/// estimates close. Increasing on [1, ∞).
pub fn t_plus(p: f64) -> Result<f64, VerifyError> {
    if !(p >= 1.0) {
        return Err(VerifyError::Domain(format!("t_plus needs p >= 1, got {p}")));
    }
    Ok(p + (p * (p - 1.0)).sqrt())
}

/// L(q) = 1 + t₊(q)/(q-1): decreasing on (1, ∞) with L > 3.
pub fn l_func(q: f64) -> Result<f64, VerifyError> {
    if !(q > 1.0) {
        return Err(VerifyError::Domain(format!("l_func needs q > 1, got {q}")));
    }
    Ok(1.0 + t_plus(q)? / (q - 1.0))
}

/// I_{p,q,λ,γ}(t) = p+q-1 - t²/(2t-1) + (2pq/(p+q)) ((γq/λp)^{t+q-1} - 1).
pub fn i_func(p: f64, q: f64, lambda: f64, gamma: f64, t: f64) -> Result<f64, VerifyError> {
    if !(t > 0.5) {
        return Err(VerifyError::Domain(format!("i_func needs t > 1/2, got {t}")));
    }
    let ratio = gamma * q / (lambda * p);
    Ok(p + q - 1.0 - t * t / (2.0 * t - 1.0)
        + (2.0 * p * q / (p + q)) * (ratio.powf(t + q - 1.0) - 1.0))
}

/// Root T of t ↦ min{I_{p,q,λ,γ}(t), I_{q,p,γ,λ}(t)} in (t₀, ∞), where
/// t₀ = max{t₊(p-1), t₊(q-1)}. Requires the map positive at t₀ for both
/// orderings; verifies the map decreases across the bracket.
pub fn find_t(p: f64, q: f64, lambda: f64, gamma: f64) -> Result<f64, VerifyError> {
    if !(p >= 2.0 && q >= 2.0) {
        return Err(VerifyError::Domain(format!(
            "find_t needs p, q >= 2 for t0 to be defined, got ({p}, {q})"
        )));
    }
    let t0 = t_plus(p - 1.0)?.max(t_plus(q - 1.0)?);
    let phi = |t: f64| -> Result<f64, VerifyError> {
        Ok(i_func(p, q, lambda, gamma, t)?.min(i_func(q, p, gamma, lambda, t)?))
    };
    let at_t0 = i_func(p, q, lambda, gamma, t0)?;
    if at_t0 <= 0.0 {
        return Err(VerifyError::HypothesisNotMet("I_{p,q,lambda,gamma}(t0) > 0", at_t0));
    }
    let at_t0_swapped = i_func(q, p, gamma, lambda, t0)?;
    if at_t0_swapped <= 0.0 {
        return Err(VerifyError::HypothesisNotMet("I_{q,p,gamma,lambda}(t0) > 0", at_t0_swapped));
    }
    let mut hi = 2.0 * t0;
    while phi(hi)? > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(VerifyError::NoRoot(hi));
        }
    }
    // monotone decrease across [t0, hi]
    let mut prev = phi(t0)?;
    for k in 1..=64 {
        let t = t0 + (hi - t0) * k as f64 / 64.0;
        let val = phi(t)?;
        if val > prev + 1e-12 * (1.0 + prev.abs()) {
            return Err(VerifyError::NotDecreasing(t));
        }
        prev = val;
    }
    let mut lo = t0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evaluated dimension thresholds and parameter-window conditions at
/// (p, q, λ, γ, N). Every verdict carries its numeric slack.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub dimension: f64,
    /// t₊(p-1), t₊(q-1) when defined (p, q >= 2).
    pub t_plus_p: Option<f64>,
    pub t_plus_q: Option<f64>,
    pub t0: Option<f64>,
    pub t_root: Option<f64>,
    /// Dimension bound from the t₀ exponent: N < 2 + 4 t₀ / (p+q-2).
    pub dim_t0: Verdict,
    pub dim_t0_bound: Option<f64>,
    /// Dimension bound from the root T: N < 2 + 4 T / (p+q-2).
    pub dim_root: Verdict,
    pub dim_root_bound: Option<f64>,
    /// Parameter cone in which the root hypothesis holds automatically.
    pub cone: Verdict,
    pub cone_bounds: Option<(f64, f64)>,
    /// Dimension bound for the Hamiltonian coupling:
    /// N < min over both exponents of 4 + 2/(x-1) + 2 sqrt(x/(x-1)).
    pub dim_h: Verdict,
    pub dim_h_bound: Option<f64>,
    /// Ratio window for the exponential system: (N-2)/8 < γ/λ < 8/(N-2).
    pub exp_ratio: Verdict,
    pub exp_ratio_bounds: (f64, f64),
}

pub fn threshold_report(p: f64, q: f64, lambda: f64, gamma: f64, dimension: f64) -> Result<ThresholdReport, VerifyError> {
    if !(p > 1.0 && q > 1.0) {
        return Err(VerifyError::Domain(format!("threshold_report needs p, q > 1, got ({p}, {q})")));
    }
    if !(lambda > 0.0 && gamma > 0.0) {
        return Err(VerifyError::Domain("threshold_report needs positive parameters".into()));
    }
    let n = dimension;
    let power_pair = p > 2.0 && q > 2.0;

    let (t_plus_p, t_plus_q, t0) = if power_pair {
        let tp = t_plus(p - 1.0)?;
        let tq = t_plus(q - 1.0)?;
        (Some(tp), Some(tq), Some(tp.max(tq)))
    } else {
        (None, None, None)
    };

    let (dim_t0, dim_t0_bound) = match t0 {
        Some(t0) => {
            let bound = 2.0 + 4.0 * t0 / (p + q - 2.0);
            (Verdict::strict((1.0 + 2.0 * t0 / (p + q - 2.0)) - n / 2.0), Some(bound))
        }
        None => (Verdict::not_applicable(), None),
    };

    let t_root = if power_pair { find_t(p, q, lambda, gamma).ok() } else { None };
    let (dim_root, dim_root_bound) = match t_root {
        Some(t) => {
            let bound = 2.0 + 4.0 * t / (p + q - 2.0);
            (Verdict::strict((1.0 + 2.0 * t / (p + q - 2.0)) - n / 2.0), Some(bound))
        }
        None => (Verdict::not_applicable(), None),
    };

    let (cone, cone_bounds) = match t0 {
        Some(t0) => {
            let base = 1.0 - (p + q) / (2.0 * p * q) * p.min(q);
            let lo = base.powf(1.0 / (t0 + q - 1.0));
            let hi = base.powf(-1.0 / (t0 + p - 1.0));
            let ratio = gamma * q / (lambda * p);
            (Verdict::strict((ratio - lo).min(hi - ratio)), Some((lo, hi)))
        }
        None => (Verdict::not_applicable(), None),
    };

    let h_bound_of = |x: f64| 4.0 + 2.0 / (x - 1.0) + 2.0 * (x / (x - 1.0)).sqrt();
    let dim_h_bound = h_bound_of(p).min(h_bound_of(q));
    let dim_h = Verdict::strict(dim_h_bound - n);

    let exp_lo = (n - 2.0) / 8.0;
    let exp_hi = 8.0 / (n - 2.0);
    let ratio = gamma / lambda;
    let exp_ratio = Verdict::strict((ratio - exp_lo).min(exp_hi - ratio));

    Ok(ThresholdReport {
        p,
        q,
        lambda,
        gamma,
        dimension,
        t_plus_p,
        t_plus_q,
        t0,
        t_root,
        dim_t0,
        dim_t0_bound,
        dim_root,
        dim_root_bound,
        cone,
        cone_bounds,
        dim_h,
        dim_h_bound: Some(dim_h_bound),
        exp_ratio,
        exp_ratio_bounds: (exp_lo, exp_hi),
    })
}

fn power_exponents_for(spec: &SystemSpec, want: Variant) -> Result<(f64, f64), VerifyError> {
    if spec.variant != want {
        return Err(VerifyError::NeedsPowerVariant { want });
    }
    spec.power_exponents().ok_or(VerifyError::NeedsPowerVariant { want })
}

/// Pointwise comparison for the gradient system with power nonlinearities:
/// under λp >= γq, every smooth solution satisfies v <= u <= (λp/γq) v.
/// Returns the minimum nodal slacks (min(u - v), min((λp/γq) v - u)).
pub fn check_pointwise_g(
    spec: &SystemSpec,
    sol: &SolutionPair,
    param: ParamPoint,
) -> Result<(f64, f64), VerifyError> {
    let (p, q) = power_exponents_for(spec, Variant::G)?;
    let ordering = param.lambda * p - param.gamma * q;
    if ordering < 0.0 {
        return Err(VerifyError::HypothesisNotMet("lambda p >= gamma q", ordering));
    }
    let factor = param.lambda * p / (param.gamma * q);
    let s1 = sol.u.iter().zip(&sol.v).map(|(u, v)| u - v).fold(f64::INFINITY, f64::min);
    let s2 = sol.u.iter().zip(&sol.v).map(|(u, v)| factor * v - u).fold(f64::INFINITY, f64::min);
    Ok((s1, s2))
}

/// Pointwise comparison for the Hamiltonian system with power kinds:
/// under qλ >= γp, the minimal solution satisfies pγu >= qλv.
/// Returns min over nodes of (pγu - qλv).
pub fn check_pointwise_h(
    spec: &SystemSpec,
    sol: &SolutionPair,
    param: ParamPoint,
) -> Result<f64, VerifyError> {
    let (p, q) = power_exponents_for(spec, Variant::H)?;
    let ordering = q * param.lambda - param.gamma * p;
    if ordering < 0.0 {
        return Err(VerifyError::HypothesisNotMet("q lambda >= gamma p", ordering));
    }
    Ok(sol
        .u
        .iter()
        .zip(&sol.v)
        .map(|(u, v)| p * param.gamma * u - q * param.lambda * v)
        .fold(f64::INFINITY, f64::min))
}

fn moment(mesh: &RadialMesh, sol: &SolutionPair, a: f64, b: f64) -> Result<f64, VerifyError> {
    let vals: Vec<f64> = sol
        .u
        .iter()
        .zip(&sol.v)
        .map(|(&u, &v)| (1.0 + u).powf(a) * (1.0 + v).powf(b))
        .collect();
    Ok(mesh.integrate(&vals)?)
}

/// Energy inequality for semi-stable gradient-system solutions with power
/// kinds, tested on (φ, ψ) = ((1+u)^t - 1, (1+v)^s - 1). Seven weighted
/// moments bound four others; returns RHS - LHS under quadrature.
pub fn check_stabpol(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    param: ParamPoint,
    sol: &SolutionPair,
    s: f64,
    t: f64,
) -> Result<f64, VerifyError> {
    let (p, q) = power_exponents_for(spec, Variant::G)?;
    let _ = param;
    if (2.0 * t - 1.0).abs() < 1e-12 || (2.0 * s - 1.0).abs() < 1e-12 {
        return Err(VerifyError::Domain(format!("s, t must differ from 1/2, got s={s}, t={t}")));
    }
    let tt = t * t / (2.0 * t - 1.0);
    let ss = s * s / (2.0 * s - 1.0);
    let lhs = p * (p - 1.0 - tt) * moment(mesh, sol, 2.0 * t + p - 2.0, q)?
        + q * (q - 1.0 - ss) * moment(mesh, sol, p, 2.0 * s + q - 2.0)?
        + 2.0 * p * q * moment(mesh, sol, t + p - 1.0, s + q - 1.0)?
        + p * (p - 1.0) * moment(mesh, sol, p - 2.0, q)?
        + q * (q - 1.0) * moment(mesh, sol, p, q - 2.0)?
        + p * tt * moment(mesh, sol, p - 1.0, q)?
        + q * ss * moment(mesh, sol, p, q - 1.0)?;
    let rhs = 2.0 * p * (p - 1.0) * moment(mesh, sol, t + p - 2.0, q)?
        + 2.0 * p * q * moment(mesh, sol, t + p - 1.0, q - 1.0)?
        + 2.0 * q * (q - 1.0) * moment(mesh, sol, p, s + q - 2.0)?
        + 2.0 * p * q * moment(mesh, sol, p - 1.0, s + q - 1.0)?;
    Ok(rhs - lhs)
}

/// The two weighted moments that stay uniformly bounded along a minimal
/// Hamiltonian branch, plus their Cauchy-Schwarz cross moment:
/// (∫(1+u)^{2t+p-1}(1+v)^{q-1}, ∫(1+u)^{p-1}(1+v)^{2τ+q-1},
///  ∫(1+u)^{p+t-1}(1+v)^{q+τ-1}).
pub fn moment_integrals(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    sol: &SolutionPair,
    t: f64,
    tau: f64,
) -> Result<(f64, f64, f64), VerifyError> {
    let (p, q) = power_exponents_for(spec, Variant::H)?;
    let first = moment(mesh, sol, 2.0 * t + p - 1.0, q - 1.0)?;
    let second = moment(mesh, sol, p - 1.0, 2.0 * tau + q - 1.0)?;
    let cross = moment(mesh, sol, p + t - 1.0, q + tau - 1.0)?;
    Ok((first, second, cross))
}

/// Uniform-boundedness report of the Hamiltonian moments along a branch.
#[derive(Debug, Clone, Copy)]
pub struct MomentReport {
    pub sup_first: f64,
    pub sup_second: f64,
    /// sup over the last half of the branch / value at mid-branch.
    pub growth_first: f64,
    pub growth_second: f64,
    /// max over points of (cross - sqrt(first * second)) / sqrt(first * second).
    pub max_cross_excess: f64,
}

/// Evaluates the two moments at every branch point. Requires the exponent
/// windows 1 < t < t₊(p), 1 < τ < t₊(q) (open intervals).
pub fn check_power_moments(
    spec: &SystemSpec,
    mesh: &RadialMesh,
    branch: &Branch,
    t: f64,
    tau: f64,
) -> Result<MomentReport, VerifyError> {
    let (p, q) = power_exponents_for(spec, Variant::H)?;
    if !(t > 1.0 && t < t_plus(p)?) {
        return Err(VerifyError::Domain(format!("t must lie in (1, t_plus(p)), got {t}")));
    }
    if !(tau > 1.0 && tau < t_plus(q)?) {
        return Err(VerifyError::Domain(format!("tau must lie in (1, t_plus(q)), got {tau}")));
    }
    if branch.points.len() < 3 {
        return Err(VerifyError::Branch("need at least 3 points".into()));
    }
    let mut firsts = Vec::with_capacity(branch.points.len());
    let mut seconds = Vec::with_capacity(branch.points.len());
    let mut max_cross_excess = f64::NEG_INFINITY;
    for pt in &branch.points {
        let (f, s, c) = moment_integrals(spec, mesh, &pt.sol, t, tau)?;
        let bound = (f * s).sqrt();
        max_cross_excess = max_cross_excess.max((c - bound) / bound);
        firsts.push(f);
        seconds.push(s);
    }
    let mid = branch.points.len() / 2;
    let half_sup = |vals: &[f64]| vals[mid..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentReport {
        sup_first: firsts.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        sup_second: seconds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        growth_first: half_sup(&firsts) / firsts[mid],
        growth_second: half_sup(&seconds) / seconds[mid],
        max_cross_excess,
    })
}

/// Blow-up regime of an extremal estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupRegime {
    /// Bounded profile: sup norm stable as the fold is approached.
    Bounded,
    /// Logarithmic growth: w(r) <= C (1 + |log r|).
    Logarithmic,
    /// Power growth: w(r) <= C r^exponent.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct BlowupFit {
    /// Least-squares slope of log w against log r on the window.
    pub slope: f64,
    /// Least-squares slope of w against |log r| on the window.
    pub log_coeff: f64,
    pub regime: BlowupRegime,
    /// Whether the regime's growth bound holds on the window (constant
    /// fitted at the outer window edge, shape conformance within factor 2).
    pub bound_ok: bool,
}

/// Default fit window (4 r₁, 0.25): the first cells are dominated by the
/// one-sided center stencil and are excluded.
pub fn default_fit_window(mesh: &RadialMesh) -> (f64, f64) {
    (4.0 * mesh.first_positive(), 0.25)
}

/// Fits the extremal estimate's radial profile on a window inside (0, 1/2)
/// and checks the dimension-dependent growth bound.
pub fn fit_blowup(
    mesh: &RadialMesh,
    branch: &Branch,
    window: (f64, f64),
) -> Result<BlowupFit, VerifyError> {
    let (r_lo, r_hi) = window;
    if !(r_lo > 0.0 && r_lo < r_hi && r_hi <= 0.5) {
        return Err(VerifyError::Domain(format!("window ({r_lo}, {r_hi}) not inside (0, 1/2]")));
    }
    let est = extremal_estimate(branch)?;
    mesh.check_shape(&est.sol.u)?;
    let mut rs = Vec::new();
    let mut ws = Vec::new();
    for (j, &r) in mesh.nodes().iter().enumerate() {
        if r >= r_lo && r <= r_hi {
            rs.push(r);
            ws.push(est.sol.u[j].max(est.sol.v[j]));
        }
    }
    if rs.len() < 4 {
        return Err(VerifyError::Domain("window contains fewer than 4 mesh nodes".into()));
    }
    if ws.iter().any(|&w| w <= 0.0) {
        return Err(VerifyError::Domain("profile is not positive on the window".into()));
    }

    let ls_slope = |xs: &[f64], ys: &[f64]| {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
        num / den
    };
    let log_r: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let log_w: Vec<f64> = ws.iter().map(|w| w.ln()).collect();
    let abs_log_r: Vec<f64> = rs.iter().map(|r| -r.ln()).collect();
    let slope = ls_slope(&log_r, &log_w);
    let log_coeff = ls_slope(&abs_log_r, &ws);

    let n = mesh.dimension();
    let (regime, bound_ok) = if n > 10.0 + 1e-9 {
        let e = -n / 2.0 + (n - 1.0).sqrt() + 2.0;
        let c = ws.last().unwrap() / rs.last().unwrap().powf(e);
        let ok = rs.iter().zip(&ws).all(|(r, w)| *w <= 2.0 * c * r.powf(e));
        (BlowupRegime::Power { exponent: e }, ok)
    } else if (n - 10.0).abs() <= 1e-9 {
        let c = ws.last().unwrap() / (1.0 - rs.last().unwrap().ln());
        let ok = rs.iter().zip(&ws).all(|(r, w)| *w <= 2.0 * c * (1.0 - r.ln()));
        (BlowupRegime::Logarithmic, ok)
    } else {
        // bounded regime: sup norm must be stable over the tail of the branch
        let last = branch.last();
        let lambda_last = last.sol.param.lambda;
        let reference = branch
            .points
            .iter()
            .rev()
            .find(|p| p.sol.param.lambda <= lambda_last * (1.0 - 1e-5));
        let ok = match reference {
            Some(p) => {
                let sup_last = last.sup_u.max(last.sup_v);
                let sup_ref = p.sup_u.max(p.sup_v);
                (sup_last - sup_ref).abs() <= 0.05 * sup_last
            }
            None => false,
        };
        (BlowupRegime::Bounded, ok)
    };
    Ok(BlowupFit { slope, log_coeff, regime, bound_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn t_plus_values_and_monotonicity() {
        assert_eq!(t_plus(1.0).unwrap(), 1.0);
        assert_relative_eq!(t_plus(2.0).unwrap(), 2.0 + 2.0f64.sqrt(), epsilon = 1e-14);
        assert!(t_plus(0.9).is_err());
        let mut last = t_plus(1.0).unwrap();
        for k in 1..=1000 {
            let q = 1.0 + 49.0 * k as f64 / 1000.0;
            let v = t_plus(q).unwrap();
            assert!(v > last, "t_plus not increasing at q = {q}");
            last = v;
        }
    }

    #[test]
    fn l_func_values_and_monotonicity() {
        assert_relative_eq!(l_func(2.0).unwrap(), 3.0 + 2.0f64.sqrt(), epsilon = 1e-14);
        assert!(l_func(1.0).is_err());
        let mut last = f64::INFINITY;
        for k in 1..=1000 {
            let q = 1.0 + 49.0 * k as f64 / 1000.0;
            let v = l_func(q).unwrap();
            assert!(v < last, "l_func not decreasing at q = {q}");
            assert!(v > 3.0, "l_func <= 3 at q = {q}");
            last = v;
        }
    }

    #[test]
    fn i_func_values() {
        // diagonal λp = γq: the bracket vanishes
        let v = i_func(3.0, 3.0, 1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, 5.0 - 4.0 / 3.0, epsilon = 1e-14);
        assert!(i_func(3.0, 3.0, 1.0, 1.0, 0.5).is_err());
        // off-diagonal: bracket included
        let v = i_func(3.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        let ratio: f64 = 2.0 * 2.0 / 3.0;
        assert_relative_eq!(
            v,
            4.0 - 4.0 / 3.0 + (12.0 / 5.0) * (ratio.powf(3.0) - 1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn find_t_matches_quadratic_root_on_diagonal() {
        // p = q = 3, λ = γ: I(t) = 5 - t²/(2t-1); root t² = 5(2t-1) -> t = 5 + 2√5
        let t = find_t(3.0, 3.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(t, 5.0 + 2.0 * 5.0f64.sqrt(), max_relative = 1e-10);
        // root bracketing
        let eps = 1e-6;
        let phi = |tt: f64| {
            i_func(3.0, 3.0, 1.0, 1.0, tt)
                .unwrap()
                .min(i_func(3.0, 3.0, 1.0, 1.0, tt).unwrap())
        };
        assert!(phi(t - eps) > 0.0);
        assert!(phi(t + eps) < 0.0);
    }

    #[test]
    fn find_t_rejects_far_off_diagonal() {
        assert!(matches!(
            find_t(3.0, 3.0, 1.0, 1e-3),
            Err(VerifyError::HypothesisNotMet(..))
        ));
    }

    #[test]
    fn threshold_report_hand_values() {
        // p = q = 3: N-bound 2 + t_plus(2) = 4 + sqrt(2)
        let rep = threshold_report(3.0, 3.0, 1.0, 1.0, 5.0).unwrap();
        assert_relative_eq!(rep.dim_t0_bound.unwrap(), 4.0 + 2.0f64.sqrt(), epsilon = 1e-12);
        assert!(rep.dim_t0.pass);
        let rep6 = threshold_report(3.0, 3.0, 1.0, 1.0, 6.0).unwrap();
        assert!(!rep6.dim_t0.pass);
        assert_relative_eq!(rep6.dim_t0.slack, 2.70710678118654752 - 3.0, epsilon = 1e-10);

        // p = q = 2: Hamiltonian bound 6 + 2 sqrt(2); N = 8 passes
        let rep8 = threshold_report(2.0, 2.0, 1.0, 1.0, 8.0).unwrap();
        assert_relative_eq!(rep8.dim_h_bound.unwrap(), 6.0 + 2.0 * 2.0f64.sqrt(), epsilon = 1e-12);
        assert!(rep8.dim_h.pass);
        // (dim_t0 not applicable below p, q > 2)
        assert!(!rep8.dim_t0.applicable);

        // exponential ratio window
        let rep9 = threshold_report(3.0, 3.0, 1.0, 1.0, 9.0).unwrap();
        assert!(rep9.exp_ratio.pass); // 7/8 < 1 < 8/7
        let rep3 = threshold_report(3.0, 3.0, 1.0, 10.0, 3.0).unwrap();
        assert!(!rep3.exp_ratio.pass); // 10 >= 8

        // diagonal cone degenerates to the whole quadrant for p = q
        let cone = rep.cone_bounds.unwrap();
        assert_eq!(cone.0, 0.0);
        assert!(cone.1.is_infinite());
        assert!(rep.cone.pass);
    }

    /// Inside the cone the root hypothesis holds: find_t succeeds at 20
    /// sampled ratio points strictly inside the cone bounds.
    #[test]
    fn cone_implies_root_hypothesis() {
        for &(p, q) in &[(3.0, 4.0), (2.5, 3.5), (4.0, 6.0), (3.0, 3.0)] {
            let t0 = t_plus(p - 1.0).unwrap().max(t_plus(q - 1.0).unwrap());
            let base: f64 = 1.0 - (p + q) / (2.0 * p * q) * p.min(q);
            let lo = base.powf(1.0 / (t0 + q - 1.0));
            let hi = base.powf(-1.0 / (t0 + p - 1.0));
            // sample the cone interior on a geometric grid (shrunk 5% inward)
            let lo_in = if lo > 0.0 { lo * 1.05 } else { hi * 1e-3 };
            let hi_in = if hi.is_finite() { hi * 0.95 } else { lo_in * 1e3 };
            for k in 0..5 {
                let f = (k as f64 + 0.5) / 5.0;
                let ratio = lo_in * (hi_in / lo_in).powf(f);
                // γq/(λp) = ratio with λ = 1
                let gamma = ratio * p / q;
                assert!(
                    find_t(p, q, 1.0, gamma).is_ok(),
                    "find_t failed strictly inside the cone: p={p} q={q} ratio={ratio}"
                );
            }
        }
    }

    #[test]
    fn stabpol_on_zero_fields_reduces_to_coefficient_identity() {
        // every moment equals ∫ 1 = 1/N; the margin collapses to 2pq/N
        let mesh = RadialMesh::new(32, 4.0, 1.0).unwrap();
        let p = ParamPoint::new(1.0, 1.0).unwrap();
        let spec = SystemSpec::power_g(3.0, 3.0).unwrap();
        let sol = SolutionPair::zero(&mesh, p);
        for &(s, t) in &[(1.5, 1.5), (2.0, 3.0), (0.4, 0.4)] {
            let margin = check_stabpol(&spec, &mesh, p, &sol, s, t).unwrap();
            assert_relative_eq!(margin, 2.0 * 3.0 * 3.0 / 4.0, max_relative = 1e-12);
        }
        assert!(matches!(
            check_stabpol(&spec, &mesh, p, &sol, 0.5, 1.5),
            Err(VerifyError::Domain(_))
        ));
    }

    #[test]
    fn moment_window_is_open() {
        let mesh = RadialMesh::new(32, 3.0, 1.0).unwrap();
        let spec = SystemSpec::power_h(2.0, 2.0).unwrap();
        let p = ParamPoint::new(0.1, 0.1).unwrap();
        let sol = SolutionPair::zero(&mesh, p);
        // boundary values of the window are rejected
        let branch_err = moment_integrals(&spec, &mesh, &sol, 1.5, 1.5);
        assert!(branch_err.is_ok());
        let fake_branch = crate::continuation::Branch {
            ray: crate::system::Ray::new(1.0, 0.1, 0.2).unwrap(),
            points: vec![],
            fold: crate::continuation::Fold { lambda_star: 0.2, bracket: (0.2, 0.2), converged: true },
            mu1: 1.0,
            coarse_mesh: false,
        };
        assert!(matches!(
            check_power_moments(&spec, &mesh, &fake_branch, 1.0, 1.5),
            Err(VerifyError::Domain(_))
        ));
        assert!(matches!(
            check_power_moments(&spec, &mesh, &fake_branch, 1.5, 1.0),
            Err(VerifyError::Domain(_))
        ));
    }

    /// Synthetic profiles with known fits: a pure power law and a pure
    /// logarithm, pushed through the least-squares formulas directly.
    #[test]
    fn least_squares_fits_recover_synthetic_profiles() {
        use crate::continuation::{Branch, BranchPoint, Fold};
        use crate::system::Ray;
        let mesh = RadialMesh::new(256, 11.0, 1.0).unwrap();
        let mk_branch = |profile: &dyn Fn(f64) -> f64| {
            let p = ParamPoint::new(1.0, 1.0).unwrap();
            let mut u: Vec<f64> = mesh.nodes().iter().map(|&r| profile(r.max(1e-12))).collect();
            let m = u.len();
            u[m - 1] = 0.0;
            let sol = SolutionPair { u: u.clone(), v: u, param: p };
            let pt = BranchPoint {
                sup_u: sol.sup_u(),
                sup_v: sol.sup_v(),
                sol,
                residual_norm: 0.0,
                eta: 0.1,
            };
            Branch {
                ray: Ray::new(1.0, 0.5, 1.0).unwrap(),
                points: vec![pt.clone(), pt.clone(), pt],
                fold: Fold { lambda_star: 1.0, bracket: (1.0, 1.0), converged: true },
                mu1: 1.0,
                coarse_mesh: false,
            }
        };
        // w = r^{-1/2}: slope -1/2 exactly
        let branch = mk_branch(&|r| r.powf(-0.5));
        let fit = fit_blowup(&mesh, &branch, (0.02, 0.25)).unwrap();
        assert_relative_eq!(fit.slope, -0.5, max_relative = 1e-10);
        // w = 2 |log r|: log-coefficient 2 exactly
        let branch = mk_branch(&|r| -2.0 * r.ln());
        let fit = fit_blowup(&mesh, &branch, (0.02, 0.25)).unwrap();
        assert_relative_eq!(fit.log_coeff, 2.0, max_relative = 1e-10);
        // window validation
        assert!(fit_blowup(&mesh, &branch, (0.4, 0.3)).is_err());
        assert!(fit_blowup(&mesh, &branch, (0.1, 0.7)).is_err());
    }

    #[test]
    fn pointwise_checks_enforce_hypotheses() {
        let mesh = RadialMesh::new(32, 3.0, 1.0).unwrap();
        let spec_g = SystemSpec::power_g(3.0, 3.0).unwrap();
        let spec_h = SystemSpec::power_h(2.0, 2.0).unwrap();
        let p_bad = ParamPoint::new(1.0, 2.0).unwrap(); // λp < γq for p = q
        let sol = SolutionPair::zero(&mesh, p_bad);
        assert!(matches!(
            check_pointwise_g(&spec_g, &sol, p_bad),
            Err(VerifyError::HypothesisNotMet(..))
        ));
        assert!(matches!(
            check_pointwise_h(&spec_h, &sol, p_bad),
            Err(VerifyError::HypothesisNotMet(..))
        ));
        // diagonal: zero fields give zero slack
        let p = ParamPoint::new(1.0, 1.0).unwrap();
        let sol = SolutionPair::zero(&mesh, p);
        let (s1, s2) = check_pointwise_g(&spec_g, &sol, p).unwrap();
        assert_eq!((s1, s2), (0.0, 0.0));
        assert_eq!(check_pointwise_h(&spec_h, &sol, p).unwrap(), 0.0);
        // variant/kind mismatch
        let e = SystemSpec::exponential();
        assert!(matches!(
            check_pointwise_g(&e, &sol, p),
            Err(VerifyError::NeedsPowerVariant { .. })
        ));
    }
}
