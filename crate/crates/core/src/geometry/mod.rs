//! Differential-geometric data of k-potential submanifolds.
//!
//! A potential `Φ` on flat coordinates `u` with metric `η` produces, through
//! the Gram ansatz `μ^{(r-1)N+m,(s-1)N+n} = c^{rs} η^{mn}`, a set of
//! `L = kN + p` second fundamental forms (k copies of the Hessian slices
//! `Φ_{m··}` followed by `p` zero forms). The modules below build those
//! objects, evaluate the Gauss, Ricci and Codazzi equations on them, and
//! assemble the first-order connection whose zero curvature certifies that
//! the frame equations can be integrated.

mod connection;
mod forms;
mod gram;
mod signature;

pub use connection::{
    connection_matrices, curvature_residual, spectral_problem, ConnectionMatrices, KPotential,
    SpectralProblem,
};
pub use forms::{
    codazzi_check, codazzi_defect, gauss_from_ricci_check, gauss_residual, gauss_tensor,
    hessian_forms, ricci_residual, ricci_tensor, second_forms, weingarten, GaussRicciCheck,
    PolyForm, SecondForms, Weingarten,
};
pub use gram::{gram_assemble, GramSpec, MuExtension};
pub use signature::admissible_signatures;
