//! Sparse recovery for nonlinear ill-posed inverse problems with the
//! nonconvex penalty alpha*||x||_1 - beta*||x||_2 (alpha >= beta >= 0).
//!
//! The crate provides:
//! - the penalty, objective and soft-thresholding primitives ([`penalty`]);
//! - a matrix-free forward-model interface and the nonlinear
//!   compressive-sensing family y = a(A b(x)) ([`operators`]);
//! - the iterative soft-thresholding solver built on the generalized
//!   conditional gradient splitting ([`solver`]);
//! - discrepancy-principle selection of the penalty weight ([`tuning`]);
//! - a deterministic benchmark harness with JSON/CSV reports ([`harness`]);
//! - slow reference oracles for verifying the fast paths ([`verify`]).

pub mod error;
pub mod harness;
pub mod operators;
pub mod penalty;
pub mod signal;
pub mod solver;
pub mod tuning;
pub mod verify;

pub use error::{Error, Result};
pub use operators::{
    finite_difference_jacobian_apply, rescale_matrix, DenseMatrix, ForwardModel,
    NonlinearCsModel, OperatorForm,
};
pub use penalty::{
    objective, regularizer, soft_threshold_scalar, soft_threshold_vector, RegularizationParams,
};
pub use signal::Signal;
pub use solver::{
    descent_direction, g_gradient, line_search, solve, stationarity_gap, zero_iterate_step,
    IterationRecord, SolveStatus, SolverConfig, SolverTrace, StepRule,
};
pub use tuning::{select_alpha, AlphaSelection, AlphaTrial, DiscrepancyConfig, SelectionFlag};
