//! Oscillatory integrals behind the dispersive decay of the Rossby-acoustic
//! waves: Bessel functions, adaptive quadrature, phase derivatives, van
//! Corput and far-field bounds, and measured `L^p` decay on a periodic plane.

mod bessel;
mod decay;
mod kernel;
mod quadrature;

pub use bessel::bessel_j;
pub use decay::{
    conjugate_exponent, decay_shape, decay_sweep, frequency_truncate, log_times, lp_norm, DecayConfig, DecayRecord,
    DecaySweep,
};
pub use kernel::{
    far_field_bound, far_field_constant, oscillatory_kernel, oscillatory_kernel_detailed, phase_derivative,
    van_corput_bound, van_corput_ratio, Branch, CutoffProfile, VanCorput, KERNEL_REL_TOL,
};
pub use quadrature::{integrate, integrate_real, Quadrature};
