//! Spectral laboratory for the low Rossby / low Mach limit of rotating
//! compressible fluids in a horizontally periodic slab.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] grids, parity-aware transforms and spectral operators,
//! * [`wave`] the Rossby-acoustic mode matrix, its eigen-structure and the
//!   exact propagator,
//! * [`dispersion`] oscillatory integrals, van Corput bounds and decay sweeps,
//! * [`limit`] the quasi-geostrophic and 2D Euler limit solvers,
//! * [`compressible`] the scaled Navier-Stokes solver together with energy,
//!   relative entropy and test-function machinery.

pub mod compressible;
pub mod dispersion;
pub mod error;
pub mod limit;
pub mod numerics;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
