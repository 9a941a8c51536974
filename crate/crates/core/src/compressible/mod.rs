//! Scaled rotating compressible Navier-Stokes in the slab
//! `T^2 x [0, 1]` with slip walls realised by even/odd extension in `x_3`,
//! together with the static state, energy and relative entropy functionals,
//! initial-data preparation and the test functions built from the wave and
//! quasi-geostrophic solutions.

mod data;
mod driver;
mod eos;
mod rei;
mod functionals;
mod solver;
mod state;
mod testfn;

pub use eos::{validate_exponents, EquationOfState, ScalingRegime};
pub use solver::{divergence, ns_step, Conservative, ForceFlags, NsSolver, Primitive, Viscosity, ACOUSTIC_CFL, VACUUM_GUARD};
pub use state::{initial_state, static_state, support_warnings, FluidState, VELOCITY_PARITY};
pub use functionals::{
    energy_functional, ess_res_split, relative_entropy, stress_contraction, uniform_bounds_report, velocity_fields,
    velocity_gradient, viscous_dissipation, BoundsSample, BoundsTracker, UniformBoundsReport, ESSENTIAL_WINDOW,
};
pub use data::{
    decompose_initial_data, frequency_cut, smooth_truncate, smooth_truncate_spectral, spatial_cut, InitialDecomposition,
};
pub use testfn::{build_test_functions, TestFunctionPair};
pub use rei::{rei_integrands, rei_residual, ReiRecord, ReiReport, ReiTerms};
pub use driver::{euler_limit_velocity, local_momentum_error, run_limit, LimitConfig, LimitRecord, LimitRun};
