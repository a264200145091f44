//! Error-controlled, shot-frugal optimization for variational quantum circuits.
//!
//! The crate is split along the optimizer/estimator boundary:
//!
//! - [`sim`] is a small exact statevector simulator. It plays the role of the
//!   quantum device: it hands out measurement samples per observable term and
//!   exact values for evaluation.
//! - [`estimators`] turns MSE targets into sufficient shot allocations and
//!   turns samples into [`Estimate`]s that carry bias, variance and MSE bounds.
//! - [`optimizers`] holds error-aware simulated annealing and gradient descent.
//!   Both emit MSE targets, never shot counts.
//! - [`benchmarks`] builds the one-qubit cosine problem and QAOA MaxCut.
//!
//! Every numeric type is generic over [`Real`] (`f64` and `f32`). The aliases
//! below fix the scalar for the common case.

pub mod benchmarks;
pub mod error;
pub mod estimators;
pub mod optimizers;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use estimators::{
    Estimate, GradientAllocation, MseTarget, RecursiveState, ShotAllocation, ValueAllocation,
};
pub use scalar::Real;
pub use sim::{Circuit, DiagonalTerm, Gate, Observable, Pauli, PauliString, StateVector};

/// Double-precision instantiations.
pub type StateVector64 = StateVector<f64>;
pub type DiagonalTerm64 = DiagonalTerm<f64>;
pub type Observable64 = Observable<f64>;
pub type Estimate64 = Estimate<f64>;
pub type RecursiveState64 = RecursiveState<f64>;
pub type BenchmarkProblem64 = benchmarks::BenchmarkProblem<f64>;
pub type TraceRow64 = optimizers::TraceRow<f64>;
pub type SaConfig64 = optimizers::SaConfig<f64>;
pub type GdConfig64 = optimizers::GdConfig<f64>;

/// Single-precision instantiations.
pub type StateVector32 = StateVector<f32>;
pub type Observable32 = Observable<f32>;
pub type Estimate32 = Estimate<f32>;
pub type BenchmarkProblem32 = benchmarks::BenchmarkProblem<f32>;
