//! Structured-grid numerics for obstacle problems driven by nonlinear elliptic
//! operators with variable growth (p(x)-Laplacian type) and unbounded data
//! handled through bounded truncation.
//!
//! The crate is organized around the pipeline
//!
//! * [`grid`] — rectangular lattices, nodal/face fields, conservative
//!   difference operators, trapezoid quadrature and set measures;
//! * [`exponent`] — variable-exponent function-space numerics: exponent
//!   validation, modular, Luxemburg norm, Marcinkiewicz bounds;
//! * [`flux`] — flux functions with p(x) growth, operator assembly
//!   `A u = -div a(x, grad u)`, and structure-condition audits;
//! * [`solver`] — projected nonlinear Gauss-Seidel for the discrete
//!   variational inequality over the constraint set `u >= psi`;
//! * [`entropy`] — truncation operators, entropy-inequality certificates,
//!   the bounded-data approximation chain, truncation-energy tables;
//! * [`free_boundary`] — coincidence sets, Lewy-Stampacchia audits,
//!   discontinuity-term reconstruction, contraction and stability checks.
//!
//! The crate is `no_std` (with `alloc`); the default `std` feature switches
//! float math to the platform intrinsics and enables wall-clock timing in
//! solve reports.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("obstacle-core needs either the `std` or the `libm` feature");

mod error;
mod math;

pub mod entropy;
pub mod exponent;
pub mod flux;
pub mod free_boundary;
pub mod grid;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
