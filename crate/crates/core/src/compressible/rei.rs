use serde::Serialize;

use super::functionals::{gradient_at, relative_entropy, stress_contraction, velocity_gradient};
use super::solver::NsSolver;
use super::state::FluidState;
use super::testfn::TestFunctionPair;
use crate::error::{Error, Result};
use crate::spectral::{integrate_samples, spectral_derivative, transform_forward, transform_inverse, Axis, Parity, ParityField};

/// Terms of the relative entropy inequality
/// `E(t) + D(t) <= E(0) + int_0^t R`, evaluated at one instant (integrands
/// in time) or accumulated over an interval.
///
/// `R` is the sum of the six right-hand terms:
///
/// * transport `int rho (d_t U + u . grad U) . (U - u)`
/// * viscous `eps^alpha int S(grad U) : grad(U - u)`
/// * Coriolis `eps^{-1} int rho (f x u) . (U - u)`
/// * pressure potential
///   `eps^{-2m} int (r - rho) d_t H'(r) + grad(H'(r) - H'(rho~)) . (r U - rho u)`
/// * pressure divergence `-eps^{-2m} int div U (p(rho) - p(r))`
/// * gravity `-eps^{-2n} int (rho - r) grad G . U` with `G = -x_3`
///
/// and `D` is the dissipation `eps^alpha int S(grad(u - U)) : grad(u - U)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ReiTerms {
    pub dissipation: f64,
    pub transport: f64,
    pub viscous: f64,
    pub coriolis: f64,
    pub pressure_potential: f64,
    pub pressure_divergence: f64,
    pub gravity: f64,
}

impl ReiTerms {
    pub fn rhs(&self) -> f64 {
        self.transport + self.viscous + self.coriolis + self.pressure_potential + self.pressure_divergence + self.gravity
    }

    pub fn axpy(&self, a: f64, o: &ReiTerms) -> ReiTerms {
        ReiTerms {
            dissipation: self.dissipation + a * o.dissipation,
            transport: self.transport + a * o.transport,
            viscous: self.viscous + a * o.viscous,
            coriolis: self.coriolis + a * o.coriolis,
            pressure_potential: self.pressure_potential + a * o.pressure_potential,
            pressure_divergence: self.pressure_divergence + a * o.pressure_divergence,
            gravity: self.gravity + a * o.gravity,
        }
    }
}

/// Instantaneous integrands of [`ReiTerms`] for a fluid state and a
/// comparison pair at the same time.
pub fn rei_integrands(state: &FluidState, pair: &TestFunctionPair, solver: &NsSolver) -> Result<ReiTerms> {
    let g = state.grid();
    if pair.r.grid != g || g != solver.grid {
        return Err(Error::ShapeMismatch("state, test functions and solver grids differ".into()));
    }
    let regime = &solver.regime;
    let eos = &solver.eos;
    let a = regime.pressure_factor();
    let nu = regime.viscosity();
    let visc = &solver.viscosity;
    let grad_u = velocity_gradient(&state.u)?;
    let grad_w = velocity_gradient(&pair.u)?;
    let phi: Vec<f64> = pair
        .r
        .values
        .iter()
        .zip(&solver.rho_tilde.values)
        .map(|(r, t)| eos.h_prime_increment(*t, r - t))
        .collect();
    let phi = transform_forward(&ParityField::new(g, Parity::Even, phi)?);
    let grad_phi: Vec<ParityField> = [Axis::X1, Axis::X2, Axis::X3]
        .iter()
        .map(|ax| Ok(transform_inverse(&spectral_derivative(&phi, *ax, 1)?)))
        .collect::<Result<_>>()?;
    let coriolis = if solver.forces.coriolis { 1.0 / regime.eps } else { 0.0 };
    let gravity = if solver.forces.gravity { regime.eps.powf(-2.0 * regime.n) } else { 0.0 };

    let n = g.len();
    let mut cols: [Vec<f64>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    for p in 0..n {
        let rho = state.rho.values[p];
        let r = pair.r.values[p];
        let u: [f64; 3] = std::array::from_fn(|i| state.u[i].values[p]);
        let w: [f64; 3] = std::array::from_fn(|i| pair.u[i].values[p]);
        let diff: [f64; 3] = std::array::from_fn(|i| w[i] - u[i]);
        let gu = gradient_at(&grad_u, p);
        let gw = gradient_at(&grad_w, p);
        let gd: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| gw[i][j] - gu[i][j]));

        let mut transport = 0.0;
        for i in 0..3 {
            let adv: f64 = (0..3).map(|j| u[j] * gw[i][j]).sum();
            transport += (pair.du_dt[i].values[p] + adv) * diff[i];
        }
        let div_w = gw[0][0] + gw[1][1] + gw[2][2];
        let flux: f64 = (0..3).map(|i| grad_phi[i].values[p] * (r * w[i] - rho * u[i])).sum();

        cols[0].push(nu * stress_contraction(visc, &gd, &gd));
        cols[1].push(rho * transport);
        cols[2].push(nu * stress_contraction(visc, &gw, &gd));
        cols[3].push(coriolis * rho * (-u[1] * diff[0] + u[0] * diff[1]));
        cols[4].push(a * ((r - rho) * eos.h_second(r) * pair.dr_dt.values[p] + flux));
        cols[5].push(-a * div_w * (eos.pressure(rho) - eos.pressure(r)));
        cols[6].push(gravity * (rho - r) * w[2]);
    }
    let i = |k: usize| integrate_samples(&g, &cols[k]);
    Ok(ReiTerms {
        dissipation: i(0),
        transport: i(1),
        viscous: i(2),
        coriolis: i(3),
        pressure_potential: i(4),
        pressure_divergence: i(5),
        gravity: i(6),
    })
}

/// One output time of a relative entropy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReiRecord {
    pub t: f64,
    pub relative_entropy: f64,
    /// Time integrals from 0 to `t`.
    pub integrated: ReiTerms,
    /// `E(0) + int R - E(t) - D`, nonnegative when the inequality holds.
    pub slack: f64,
}

/// Budget of the relative entropy inequality along a stored trajectory,
/// with time integrals by the trapezoidal rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReiReport {
    pub records: Vec<ReiRecord>,
}

impl ReiReport {
    pub fn min_slack(&self) -> f64 {
        self.records.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

pub fn rei_residual(trajectory: &[FluidState], pairs: &[TestFunctionPair], solver: &NsSolver) -> Result<ReiReport> {
    if trajectory.len() != pairs.len() || trajectory.is_empty() {
        return Err(Error::TimeGridMismatch(format!(
            "{} states against {} test function pairs",
            trajectory.len(),
            pairs.len()
        )));
    }
    for (s, p) in trajectory.iter().zip(pairs) {
        if (s.time - p.t).abs() > 1e-12 * s.time.abs().max(1.0) {
            return Err(Error::TimeGridMismatch(format!("state at t = {} paired with t = {}", s.time, p.t)));
        }
    }
    if trajectory.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(Error::TimeGridMismatch("times must increase strictly".into()));
    }
    let mut records = Vec::with_capacity(trajectory.len());
    let mut acc = ReiTerms::default();
    let mut prev: Option<(f64, ReiTerms)> = None;
    let mut e0 = 0.0;
    for (s, p) in trajectory.iter().zip(pairs) {
        let terms = rei_integrands(s, p, solver)?;
        let e = relative_entropy(s, &p.r, &p.u, &solver.regime, &solver.eos)?;
        match prev {
            None => e0 = e,
            Some((t0, f0)) => {
                let h = 0.5 * (s.time - t0);
                acc = acc.axpy(h, &f0).axpy(h, &terms);
            }
        }
        prev = Some((s.time, terms));
        records.push(ReiRecord { t: s.time, relative_entropy: e, integrated: acc, slack: e0 + acc.rhs() - e - acc.dissipation });
    }
    Ok(ReiReport { records })
}
