//! The Rossby-acoustic operator `B(omega): (s, V) -> (div V, omega f x V + grad s)`
//! and its Fourier symbol.
//!
//! At horizontal wavenumber `xi` and vertical wavenumber `k` the linear system
//! reads `d/dt X + i A(xi, k, omega) X = 0` with the Hermitian mode matrix
//!
//! ```text
//!     [ 0    xi1       xi2      k ]
//! A = [ xi1  0         i omega  0 ]
//!     [ xi2  -i omega  0        0 ]
//!     [ k    0         0        0 ]
//! ```
//!
//! whose eigenvalues come in pairs `+-lambda_1`, `+-lambda_3` with
//! `lambda_1 lambda_3 = omega |k|`.

mod matrix;
mod multiplier;
mod propagator;

pub use matrix::{
    assemble_mode_matrix, eigenbasis, eigenbasis_closed, eigenbasis_numeric, eigenvalues_closed,
    eigenvalues_oracle, propagate_mode, EigenSystem, ModeMatrix, ModeState, CLOSED_FORM_GAP_TOL,
    CLOSED_FORM_XI_TOL,
};
pub use multiplier::{multiplier_sup_check, MultiplierReport};
pub use propagator::{apply_b, evolve, kernel_project, SpectralState4, WavePropagator};
