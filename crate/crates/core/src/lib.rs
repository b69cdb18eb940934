//! Associativity (WDVV) equations, Dubrovin–Frobenius structures and their
//! realization as k-potential flat torsionless submanifolds of
//! pseudo-Euclidean spaces.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation on small dense objects:
//!
//! - [`linalg`]: symmetric matrices, inversion and inertia.
//! - [`potential`]: exact rational polynomials and their derivative tensors.
//! - [`frobenius`]: structure constants, WDVV residuals, units.
//! - [`geometry`]: Gram ansatz, second forms, Gauss/Ricci/Codazzi checks,
//!   connection matrices and their curvature.
//! - [`realization`]: fixed-step integration of the moving frame.
//! - [`hydro`]: the three-dimensional reduction to a single equation for
//!   `f(u², u³)` and its hydrodynamic-type form.
//!
//! Indices are zero-based throughout: the coordinate written `u¹` in the
//! literature is index `0` here.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod frobenius;
pub mod geometry;
pub mod hydro;
pub mod linalg;
pub mod potential;
pub mod realization;
mod residual;

pub use error::{Error, Result};
pub use residual::IndexedMax;
pub use linalg::{Inertia, Matrix, SymMatrix};
pub use potential::{PolyPotential, Rational, ThirdTensor};
