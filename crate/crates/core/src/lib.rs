//! Numerical companion to the `H^{s,p}(curl)` well-posedness theory of the
//! anisotropic Maxwell problem
//!
//! ```text
//! curl(a(x) curl u) + k² u = f,   ν ∧ u = 0.
//! ```
//!
//! The crate provides
//!
//! * discrete domains and fields ([`grid`]) with the hypothesis constants
//!   `m`, `M`, `M̃` of a coefficient ([`coefficient`]),
//! * spectral and staggered curl operators, `A`, `K = curl curl + I` and the
//!   split `f = g₁ + curl g₂` ([`operators`]),
//! * exact and CG inversion of `K` plus discrete `M_{s,p}` estimates
//!   ([`unperturbed`]),
//! * the preconditioned fixed-point solver `u ↦ u − t K⁻¹(A u − f)` with its
//!   contraction budget `k₀` ([`solver`]),
//! * Bessel-potential norms and Kato-Ponce ratio sampling ([`sobolev`]),
//! * the `(s, 1/p)` region calculus `R_Ω`, `S⁺`, `S⁻` ([`region`]).

pub mod coefficient;
pub mod eig;
pub mod error;
pub mod grid;
pub mod operators;
pub mod random;
pub mod region;
pub mod sobolev;
pub mod solver;
pub mod spectral;
pub mod table;
pub mod unperturbed;

pub use coefficient::{
    ellipticity_bounds, holder_seminorm, sample_coefficient, CoefficientField, CoefficientSpec,
    EllipticityBounds,
};
pub use eig::Sym3;
pub use error::{Error, ErrorClass, Result};
pub use grid::{Grid3, Placement, ScalarField, Topology, VectorField};
pub use operators::{apply_k, curl, dual_split, CurlOperator, MaxwellOperator};
pub use region::{region_geometry, region_sample, MspModel, RegionParams, RegionPoint};
pub use sobolev::{
    bessel_norm, curl_graph_norm, katoponce_estimate, winf_norm, KatoPonceModel, NormIndex,
};
pub use solver::{
    groeger_solve, k0, measure_contraction, stability_constant, step_size, GroegerSolver,
    IterationTrace, SolveStatus, SolverParams,
};
pub use table::IndexTable;
pub use unperturbed::{estimate_msp, solve_k_cg, solve_k_spectral, KInverse, OperatorNormEstimate};
