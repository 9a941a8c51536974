use serde::Serialize;

use super::eos::{EquationOfState, ScalingRegime};
use super::solver::Viscosity;
use super::state::{FluidState, VELOCITY_PARITY};
use crate::error::{Error, Result};
use crate::numerics::{loglog_slope, plateau};
use crate::spectral::{integrate_samples, spectral_derivative, transform_forward, transform_inverse, Axis, ParityField};

const AXES: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

/// `int 1/2 rho |u|^2 + eps^{-2m} (H(rho) - H'(rho~)(rho - rho~) - H(rho~))`.
pub fn energy_functional(state: &FluidState, rho_tilde: &ParityField, regime: &ScalingRegime, eos: &EquationOfState) -> f64 {
    let zero = [0.0; 3];
    density_integral(state, rho_tilde, |_| zero, regime, eos)
}

/// Relative entropy of `(rho, u)` with respect to `(r, U)`:
/// `int 1/2 rho |u - U|^2 + eps^{-2m} (H(rho) - H'(r)(rho - r) - H(r))`.
pub fn relative_entropy(
    state: &FluidState,
    r: &ParityField,
    u: &[ParityField; 3],
    regime: &ScalingRegime,
    eos: &EquationOfState,
) -> Result<f64> {
    let g = state.grid();
    if r.grid != g || u.iter().any(|f| f.grid != g) {
        return Err(Error::ShapeMismatch("test functions live on a different grid".into()));
    }
    if let Some(bad) = r.values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Positivity(format!("test density {bad:.3e} is not positive")));
    }
    Ok(density_integral(state, r, |i| [u[0].values[i], u[1].values[i], u[2].values[i]], regime, eos))
}

fn density_integral(
    state: &FluidState,
    r: &ParityField,
    vel: impl Fn(usize) -> [f64; 3],
    regime: &ScalingRegime,
    eos: &EquationOfState,
) -> f64 {
    let a = regime.pressure_factor();
    let vals: Vec<f64> = (0..state.rho.values.len())
        .map(|i| {
            let rho = state.rho.values[i];
            let w = vel(i);
            let kin: f64 = (0..3).map(|c| (state.u[c].values[i] - w[c]).powi(2)).sum();
            0.5 * rho * kin + a * eos.bregman(r.values[i], rho - r.values[i])
        })
        .collect();
    integrate_samples(&state.grid(), &vals)
}

/// Splits `h = h_ess + h_res` with `h_ess = chi(rho) h`, where `chi` is a
/// smooth plateau supported in `window` and equal to one on its middle half.
pub fn ess_res_split(h: &ParityField, rho: &ParityField, window: [f64; 2]) -> Result<(ParityField, ParityField)> {
    let [lo, hi] = window;
    if !(lo < 1.0 && 1.0 < hi) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] must contain 1 in its interior")));
    }
    if h.grid != rho.grid {
        return Err(Error::ShapeMismatch("field and density grids differ".into()));
    }
    let ess: Vec<f64> = h.values.iter().zip(&rho.values).map(|(h, r)| plateau(*r, lo, hi) * h).collect();
    let res = h.values.iter().zip(&ess).map(|(h, e)| h - e).collect();
    Ok((
        ParityField { grid: h.grid, parity: h.parity, values: ess },
        ParityField { grid: h.grid, parity: h.parity, values: res },
    ))
}

/// `grad[i][j] = d_j u_i` on the collocation grid.
pub fn velocity_gradient(u: &[ParityField; 3]) -> Result<[[ParityField; 3]; 3]> {
    let mut out: Vec<[ParityField; 3]> = Vec::with_capacity(3);
    for ui in u {
        let hat = transform_forward(ui);
        let row: Vec<ParityField> =
            AXES.iter().map(|ax| Ok(transform_inverse(&spectral_derivative(&hat, *ax, 1)?))).collect::<Result<_>>()?;
        out.push(row.try_into().expect("three derivatives"));
    }
    Ok(out.try_into().expect("three rows"))
}

/// Pointwise `S(A) : B` for velocity gradients `A`, `B`.
pub fn stress_contraction(visc: &Viscosity, a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    let mut sym = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            sym += (a[i][j] + a[j][i]) * b[i][j];
        }
    }
    let (da, db) = (a[0][0] + a[1][1] + a[2][2], b[0][0] + b[1][1] + b[2][2]);
    visc.mu * (sym - 2.0 / 3.0 * da * db) + visc.eta * da * db
}

pub(crate) fn gradient_at(g: &[[ParityField; 3]; 3], p: usize) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].values[p]))
}

/// Instantaneous viscous dissipation `eps^alpha int S(grad u) : grad u`.
pub fn viscous_dissipation(state: &FluidState, regime: &ScalingRegime, visc: &Viscosity) -> Result<f64> {
    let grad = velocity_gradient(&state.u)?;
    let vals: Vec<f64> = (0..state.rho.values.len())
        .map(|p| {
            let a = gradient_at(&grad, p);
            stress_contraction(visc, &a, &a)
        })
        .collect();
    Ok(regime.viscosity() * integrate_samples(&state.grid(), &vals))
}

/// Density window used for the essential part in the uniform bounds.
pub const ESSENTIAL_WINDOW: [f64; 2] = [0.5, 1.5];

/// Suprema over a trajectory of the quantities controlled uniformly in `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsSample {
    pub eps: f64,
    /// `sup_t ||sqrt(rho) u||_{L^2}`.
    pub kinetic: f64,
    /// `sup_t ||[(rho - rho~) / eps^m]_ess||_{L^2}`.
    pub essential_density: f64,
    /// `sup_t |{rho outside the middle of the window}| / eps^{2m}`.
    pub residual_measure: f64,
    /// `int_0^T eps^alpha int S(grad u) : grad u` (trapezoid in time).
    pub dissipation: f64,
    /// `sup_t ||rho - rho~||_{L^2}`.
    pub density_deviation: f64,
}

/// Accumulates a [`BoundsSample`] from snapshots in time order.
#[derive(Debug, Clone)]
pub struct BoundsTracker {
    sample: BoundsSample,
    last: Option<(f64, f64)>,
}

impl BoundsTracker {
    pub fn new(eps: f64) -> Self {
        BoundsTracker {
            sample: BoundsSample {
                eps,
                kinetic: 0.0,
                essential_density: 0.0,
                residual_measure: 0.0,
                dissipation: 0.0,
                density_deviation: 0.0,
            },
            last: None,
        }
    }

    pub fn observe(
        &mut self,
        state: &FluidState,
        rho_tilde: &ParityField,
        regime: &ScalingRegime,
        visc: &Viscosity,
    ) -> Result<()> {
        let g = state.grid();
        let mach = regime.mach();
        let s = &mut self.sample;
        let sru = state.sqrt_rho_u();
        let kin: f64 = sru.iter().map(|c| integrate_samples(&g, &c.iter().map(|v| v * v).collect::<Vec<_>>())).sum();
        s.kinetic = s.kinetic.max(kin.sqrt());

        let dev_vals: Vec<f64> = state.rho.values.iter().zip(&rho_tilde.values).map(|(r, t)| r - t).collect();
        let dev = ParityField { grid: g, parity: state.rho.parity, values: dev_vals };
        s.density_deviation = s.density_deviation.max(dev.l2_norm_sq().sqrt());
        let (ess, _) = ess_res_split(&dev.map(|v| v / mach), &state.rho, ESSENTIAL_WINDOW)?;
        s.essential_density = s.essential_density.max(ess.l2_norm_sq().sqrt());
        let [lo, hi] = ESSENTIAL_WINDOW;
        let w = 0.25 * (hi - lo);
        let outside: Vec<f64> =
            state.rho.values.iter().map(|r| if *r < lo + w || *r > hi - w { 1.0 } else { 0.0 }).collect();
        s.residual_measure = s.residual_measure.max(integrate_samples(&g, &outside) / (mach * mach));

        let d = viscous_dissipation(state, regime, visc)?;
        if let Some((t0, d0)) = self.last {
            s.dissipation += 0.5 * (state.time - t0) * (d + d0);
        }
        self.last = Some((state.time, d));
        Ok(())
    }

    pub fn finish(self) -> BoundsSample {
        self.sample
    }
}

/// Uniform-in-`eps` bounds across a sweep, with the fitted exponent `p` of
/// `sup_t ||rho - rho~||_{L^2} ~ eps^p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformBoundsReport {
    pub samples: Vec<BoundsSample>,
    pub density_exponent: f64,
    /// `max / min` of the kinetic bound across the sweep.
    pub kinetic_spread: f64,
}

pub fn uniform_bounds_report(samples: &[BoundsSample]) -> Result<UniformBoundsReport> {
    let mut eps: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 distinct eps values, got {}", eps.len())));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.density_deviation).collect();
    let density_exponent = if y.iter().all(|v| *v > 0.0) { loglog_slope(&x, &y) } else { f64::NAN };
    let kmax = samples.iter().map(|s| s.kinetic).fold(0.0, f64::max);
    let kmin = samples.iter().map(|s| s.kinetic).fold(f64::INFINITY, f64::min);
    Ok(UniformBoundsReport { samples: samples.to_vec(), density_exponent, kinetic_spread: kmax / kmin })
}

/// Velocity fields with the parities of a fluid state.
pub fn velocity_fields(grid: crate::spectral::Grid, f: impl Fn(usize, f64, f64, f64) -> f64) -> [ParityField; 3] {
    std::array::from_fn(|c| ParityField::from_fn(grid, VELOCITY_PARITY[c], |x, y, z| f(c, x, y, z)))
}
