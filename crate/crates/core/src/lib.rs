//! Optimal Markovian couplings of Lévy triplets with finitely supported jump
//! measures, and the Wasserstein generator metric they induce.
//!
//! A triplet `(κ, α, μ)` is always in global form: the jump integral is fully
//! compensated, so the mean vector is `κ`.

pub mod error;
pub mod gen_metric;
pub mod io;
pub mod levy_ot;
pub mod linalg;
pub mod psd_transport;
pub mod simulate;
pub mod strategy;
pub mod tol;
pub mod types;

pub use error::{Error, Result};
pub use gen_metric::{
    build_independent_coupling, build_optimal_coupling, generator_distance, lambda_convergence_report,
    lambda_distance_sq, optimal_growth, theta2, truncate_measure, ConvergenceReport, CoupledTriplet,
    GeneratorDistance,
};
pub use levy_ot::{
    check_cyclical_monotonicity, classical_ot_solve, extract_duals, levy_ot_solve, CycleCheck, Potential,
    TransportSolution,
};
pub use psd_transport::{bures_wasserstein_sq, dual_matrix_certificate, optimal_cross_block};
pub use simulate::{estimate_cost_growth, estimate_sup_distance, simulate_path, McEstimate, PathSample};
pub use strategy::{CouplingStrategy, StrategyRegistry};
pub use types::{
    validate_coupling, CouplingAtom, DiscreteLevyMeasure, LevyCoupling, LevyTriplet, Point, PsdMatrix,
};
