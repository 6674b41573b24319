//! Bi-Hamiltonian structure of the holomorphic spin Sutherland hierarchy.
//!
//! The phase space is the holomorphic cotangent bundle of GL(n,C), realized as
//! pairs (g, L) of an invertible matrix and a Lie-algebra element. Two compatible
//! Poisson brackets live on it: the canonical cotangent bracket and a second one
//! transferred from the Heisenberg double of the standard Poisson-Lie structure.
//! Poisson reduction by simultaneous conjugation produces the spin Sutherland
//! hierarchy with its dynamical r-matrix brackets; hyperbolic and trigonometric
//! real slices recover the real models.
//!
//! Every structural identity is executable: floating-point residual checks for
//! the analytic statements, and exact zero-polynomial certificates (Gaussian
//! rational coefficients) for the Jacobi and compatibility claims.

pub mod brackets;
pub mod error;
pub mod heisenberg;
pub mod hierarchy;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod poly;
pub mod realforms;
pub mod reduction;
pub mod rmatrix;
pub mod rng;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix};
pub use observables::{Observable, PhasePoint};
pub use reduction::ReducedPoint;
