//! Chebyshev pseudo-spectral Newton solver for capillary generating curves.
//!
//! The interface is parametrized by scaled arclength `τ ∈ [-1, 1]` and
//! solved as a first order system for `(R, U, Ψ)` together with the half
//! arclength `ℓ`. Three problem classes are supported: disk-type
//! interfaces in a tube, annular interfaces between two coaxial walls,
//! and the planar analogue between two vertical plates.

pub mod chebcore;
pub mod error;
pub mod guess;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod solver;

pub use chebcore::{bary_eval, cheb_points, diffmat, resample, ChebGrid, RectOp};
pub use error::Error;
pub use guess::{initial_guess, laplace_height, GuessCurve, Shape};
pub use model::{select_formulation, Discretization, Formulation, ProblemKind, ProblemSpec, StateVector};
pub use oracle::{validate, IvpState, ValidationResult};
pub use solver::{
    adaptive_solve, continuation_solve, newton_solve, solve_from_state, BvpFailure, NewtonFailure,
    NewtonFailureReason, Refinement, RefinementTrigger, SolveError, SolveReport, SolverConfig,
};
