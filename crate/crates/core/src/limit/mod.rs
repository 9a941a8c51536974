//! Limit systems on the horizontal torus: planar incompressible Euler in
//! vorticity form and the quasi-geostrophic equation
//! `d_t Pi + grad^perp q . grad Pi = 0`, `Pi = (Delta_h - omega^2) q`,
//! which reduces to Euler at `omega = 0`.

mod qg;

pub use qg::{
    enstrophy, euler_pressure, euler_step, integrate_qg, maxvort, qg_energy, qg_initial_data, qg_step, qg_tendency,
    velocity_from_q, QgOptions, QgRecord, QgState, Vorticity2D, DT_REFRESH_STEPS,
};
