//! Continuation solver and runtime verification for time-dependent
//! mean-field games with congestion on the flat torus.
//!
//! The numerical kernels ([`grid`], [`hamiltonian`], [`system`]) are generic
//! over the scalar type; the solvers work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
pub mod estimates;
pub mod galerkin;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod linearized;
pub mod mc;
pub mod scalar;
pub mod system;

pub use error::{MfgError, Result};
pub use scalar::Scalar;

pub type Field64 = grid::Field<f64>;
pub type Field32 = grid::Field<f32>;
pub type VectorField64 = grid::VectorField<f64>;
pub type SpaceTimeField64 = grid::SpaceTimeField<f64>;
pub type SpaceTimeField32 = grid::SpaceTimeField<f32>;
pub type TimeGrid64 = grid::TimeGrid<f64>;
pub type Hamiltonian64 = hamiltonian::HamiltonianModel<f64>;
pub type Hamiltonian32 = hamiltonian::HamiltonianModel<f32>;
pub type Problem64 = system::MfgProblem<f64>;
pub type Problem32 = system::MfgProblem<f32>;
pub type Pair64 = system::SolutionPair<f64>;
