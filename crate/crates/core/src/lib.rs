//! Numerical laboratory for the Neumann spectral gap of one-dimensional
//! Schrödinger operators `-d²/dx² + v` on `(-L/2, L/2)` with symmetric,
//! nonnegative, compactly supported potentials.
//!
//! The crate is split along the data flow:
//!
//! - [`potentials`]: admissible potential shapes and hypothesis validation.
//! - [`eigensolver`]: finite-difference discretization, Sturm bisection,
//!   inverse iteration and Richardson-controlled solves.
//! - [`stepsolver`]: the transcendental quantization condition of the
//!   centered step, used as an exact ground-state oracle.
//! - [`bounds`]: closed-form lower bounds on the gap and asymptotic fits.

pub mod bounds;
pub mod eigensolver;
pub mod potentials;
pub mod stepsolver;

pub use bounds::{BoundReport, FitResult, SweepRecord};
pub use eigensolver::{Discretization, EigenResult};
pub use potentials::{HypothesisReport, PotentialKind, PotentialSpec};
pub use stepsolver::{QuantizationRoot, StepProblem};
