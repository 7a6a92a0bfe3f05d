//! Numerical laboratory for coupled Gelfand-type elliptic systems on the
//! unit ball: radially symmetric Newton solves, minimal-branch continuation
//! with fold bracketing, principal eigenvalues of the coupled linearization,
//! and executable forms of the associated stability inequalities, pointwise
//! comparisons, and dimension thresholds.

pub mod continuation;
pub mod linalg;
pub mod mesh;
pub mod nonlinearity;
pub mod operator;
pub mod solution;
pub mod solver;
pub mod stability;
pub mod suite;
pub mod system;
pub mod verify;

pub use continuation::{
    extremal_estimate, trace_ray, trace_upsilon, Branch, BranchPoint, ExtremalEstimate, Fold,
    TraceError, TraceOptions, UpsilonCurve, UpsilonPoint, UpsilonSample,
};
pub use mesh::{MeshError, RadialMesh};
pub use nonlinearity::{Nonlinearity, NonlinearityError};
pub use solution::{SolutionError, SolutionPair, TestFunctionPair};
pub use solver::{jacobian, newton_solve, residual, NewtonResult, SolveError, SolveOptions};
pub use stability::{
    check_gra, check_radialstab, check_twist, eigen_residual, principal_dirichlet_eigenvalue,
    principal_eigenpair, random_test_pair, step3_bound, step3_testfn, EigOptions, Eigenpair,
    StabilityError,
};
pub use suite::{run_suite, SuiteEntry, SuiteError, SuiteOptions};
pub use system::{ParamPoint, Ray, RhsPartials, RhsValues, SystemSpec, SystemError, Variant};
pub use verify::{
    check_pointwise_g, check_pointwise_h, check_power_moments, check_stabpol, default_fit_window,
    find_t, fit_blowup, i_func, l_func, moment_integrals, t_plus, threshold_report, BlowupFit,
    BlowupRegime, MomentReport, ThresholdReport, Verdict, VerifyError,
};
