//! Constrained Willmore minimization over axisymmetric profile curves.
//!
//! A profile curve `γ = (γ₁, γ₂) : [0,1] → {x₁ ≥ 0}` with endpoints on the
//! axis generates a surface of revolution of spherical type. This crate
//! discretizes such curves, evaluates the Willmore energy `W`, area `A`,
//! volume `V` and isoperimetric ratio `I = 6 sqrt(π) V / A^{3/2}` together
//! with their exact discrete first variations, and minimizes `W` subject to
//! `A = 1`, `V = σ / (6 sqrt(π))` by projected gradient descent.
//!
//! The harness layer reproduces the structural behavior of the constrained
//! minimizers at small σ: energies approach `8π`, shapes approach the double
//! sphere, and a catenoidal neck of shrinking radius forms near `t = 1/2`.
//!
//! Modules map onto the pipeline:
//! * [`curve`] — discrete curves, stencils, reparameterization, admissibility;
//! * [`functionals`] — `W, A, V, I`, gradients, Willmore operator,
//!   Euler-Lagrange residual;
//! * [`reference`] — spheres, the double sphere, the catenoid blow-up profile
//!   and the inverted-catenoid seed;
//! * [`optimizer`] — constraint projection and the descent loop;
//! * [`graph`] — near-axis graph patches and λ-residue fits;
//! * [`harness`] — neck detection, double-sphere comparison, σ-sweeps and
//!   file output.

pub mod curve;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod harness;
pub mod optimizer;
pub mod reference;
mod spline;

pub use curve::{
    curve_csv_string, curve_from_csv, differentiate, differentiate_open, reparametrize_arclength,
    validate_admissible, AdmissibilityReport, GeometryCache, OpenCurve, ProfileCurve,
};
pub use error::{Error, Result};
pub use functionals::{
    area, el_residual, first_variations, isoperimetric_ratio, volume, willmore_energy,
    willmore_operator, ELResidual, FunctionalGradients,
};
pub use graph::{extract_patch, fit_lambda, mean_curvature_expansion, GraphPatch, LambdaFit, PatchSide};
pub use harness::{
    compare_double_sphere, detect_neck, diagnose_text, run_sweep, DoubleSphereDistance,
    NeckReport, SweepRecord,
};
pub use optimizer::{
    minimize, normalize_f0plus, project_constraints, MinimizerResult, SeedKind, SolveConfig,
};
pub use reference::{
    catenoid_blowup_profile, double_sphere_profile, schygulla_seed, sphere_profile, SchygullaSeed,
};
