//! Iterative solvers for the discrete-time algebraic Riccati equation and
//! tools for probing their monotonicity.
//!
//! * [`kernel`]: symmetric matrices, Loewner order, spectral radius, discrete
//!   Lyapunov equation.
//! * [`riccati`]: Riccati difference and Newton-Hewer iterations over
//!   (possibly time-varying) parameter schedules.
//! * [`monotonicity`]: pairwise order-preservation reports and the block
//!   parameter ordering.
//! * [`scenarios`] and [`search`]: the canonical counterexamples and a seeded
//!   search for new ones.

pub mod error;
pub mod kernel;
pub mod monotonicity;
pub mod riccati;
pub mod scenarios;
pub mod search;

pub use error::{Error, Result};
pub use kernel::{
    is_psd, loewner_compare, solve_discrete_lyapunov, spectral_radius, CostMatrix, Matrix,
    OrderingResult, Relation, SymmetricMatrix, DEFAULT_TOL, STABILITY_MARGIN,
};
pub use monotonicity::{
    check_iterate_monotonicity, check_pair_monotonicity, hamiltonian_block,
    hamiltonian_order_holds, MonotonicityReport, ViolationWitness,
};
pub use riccati::{
    dare_residual, evaluate_policy_cost, is_controllable, is_observable, newton_hewer_step,
    optimal_gain, riccati_difference_step, run_trajectory, scalar_newton_hewer_step,
    scalar_riccati_step, solve_dare_fixed_point, Extension, Gain, Init, Method, ParameterSchedule,
    SystemParams, Trajectory,
};
pub use scenarios::{
    build_example1, build_example2, PairedScenario, TrajectorySpec, DEFAULT_HORIZON,
};
pub use search::{search_counterexample, CounterexampleReport, SearchConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
