use serde::Serialize;

use super::data::decompose_initial_data;
use super::eos::{EquationOfState, ScalingRegime};
use super::functionals::{energy_functional, relative_entropy, BoundsSample, BoundsTracker};
use super::rei::{rei_integrands, ReiTerms};
use super::solver::{Conservative, ForceFlags, NsSolver, Viscosity};
use super::state::{support_warnings, FluidState};
use super::testfn::{build_test_functions, TestFunctionPair};
use crate::error::{Error, Result};
use crate::limit::{integrate_qg, qg_initial_data, qg_tendency, velocity_from_q, QgOptions, QgState, Vorticity2D};
use crate::spectral::{curl_h, integrate_samples, transform_inverse, vertical_average, Grid, Parity, ParityField, SpectralField};
use crate::wave::{SpectralState4, WavePropagator};

/// The step is recomputed from the acoustic CFL rule this often.
const DT_REFRESH: usize = 10;

/// Settings of one singular-limit run at fixed `eps` and `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConfig {
    pub grid: Grid,
    pub regime: ScalingRegime,
    pub eos: EquationOfState,
    pub forces: ForceFlags,
    pub viscosity: Viscosity,
    pub delta: f64,
    /// Final time.
    pub tau: f64,
    /// Number of equal output intervals on `[0, tau]`.
    pub outputs: usize,
    /// Fraction of the acoustic CFL step actually taken, in `(0, 1]`.
    pub cfl_fraction: f64,
    /// Radius of the horizontal disc, centred in the box, on which the
    /// momentum is compared with the limit velocity.
    pub local_radius: f64,
}

/// One row of the `t,eps,delta,Eeps,energy,mass,dens_dev` series, with the
/// relative entropy budget alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRecord {
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "Eeps")]
    pub eeps: f64,
    pub energy: f64,
    pub mass: f64,
    pub dens_dev: f64,
    pub slack: f64,
    pub integrated: ReiTerms,
}

#[derive(Debug, Clone)]
pub struct LimitRun {
    pub config: LimitConfig,
    pub records: Vec<LimitRecord>,
    pub bounds: BoundsSample,
    /// Energy functional of the initial state.
    pub initial_energy: f64,
    /// `||sqrt(rho) u - v_delta||_{L^2}` on the local cylinder at `tau`, with
    /// `v_delta` the planar Euler flow from the smoothed data.
    pub local_momentum_error: f64,
    pub final_state: FluidState,
    pub final_pair: TestFunctionPair,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl LimitRun {
    /// `min_t slack(t) / E_0`.
    pub fn worst_slack_ratio(&self) -> f64 {
        self.records.iter().map(|r| r.slack / self.initial_energy).fold(f64::INFINITY, f64::min)
    }

    pub fn final_entropy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.eeps)
    }
}

struct Stage {
    dc: Conservative,
    dpi: SpectralField,
    terms: ReiTerms,
}

struct Coupled<'a> {
    solver: &'a NsSolver,
    waves: &'a WavePropagator,
    wave0: &'a SpectralState4,
    delta: f64,
}

impl Coupled<'_> {
    fn pair(&self, t: f64, pi: &SpectralField) -> Result<TestFunctionPair> {
        let r = &self.solver.regime;
        let wave = self.waves.evolve(self.wave0, t / r.mach())?;
        let qg = QgState { pi: pi.clone(), omega: r.omega(), time: t };
        build_test_functions(t, r, self.delta, &wave, &qg, &self.solver.rho_tilde)
    }

    fn eval(&self, t: f64, c: &Conservative, pi: &SpectralField) -> Result<Stage> {
        let dc = self.solver.rhs(c)?;
        let dpi = qg_tendency(pi, self.solver.regime.omega())?;
        let state = self.solver.to_fluid(c, t)?;
        let terms = rei_integrands(&state, &self.pair(t, pi)?, self.solver)?;
        Ok(Stage { dc, dpi, terms })
    }
}

fn advance(
    c: &Conservative,
    pi: &SpectralField,
    s: &Stage,
    h: f64,
) -> Result<(Conservative, SpectralField)> {
    Ok((c.axpy(h, &s.dc)?, pi.axpy(h, &s.dpi)?))
}

/// Planar Euler velocity at `tau` from the vertically averaged vorticity of
/// the smoothed velocity data.
pub fn euler_limit_velocity(u_delta: &[SpectralField; 3], tau: f64) -> Result<[SpectralField; 2]> {
    let zeta = curl_h(&vertical_average(&u_delta[0]), &vertical_average(&u_delta[1]))?;
    let start = Vorticity2D::new(zeta)?.as_qg();
    let (end, _) = integrate_qg(&start, tau, &QgOptions { record_every: usize::MAX, ..QgOptions::default() })?;
    velocity_from_q(&end)
}

/// `||sqrt(rho) u - (v, 0)||_{L^2}` over the cylinder of the given radius
/// about the box centre.
pub fn local_momentum_error(state: &FluidState, v: &[SpectralField; 2], radius: f64) -> Result<f64> {
    let g = state.grid();
    if v[0].grid != g.horizontal() {
        return Err(Error::ShapeMismatch("limit velocity must live on the horizontal grid".into()));
    }
    let (v1, v2) = (transform_inverse(&v[0]), transform_inverse(&v[1]));
    let sru = state.sqrt_rho_u();
    let c = 0.5 * g.length;
    let mut vals = vec![0.0; g.len()];
    for k in 0..g.nz {
        for i2 in 0..g.ny {
            for i1 in 0..g.nx {
                if (g.x(i1) - c).hypot(g.y(i2) - c) > radius {
                    continue;
                }
                let p = g.idx(i1, i2, k);
                let h = g.idx(i1, i2, 0);
                vals[p] = (sru[0][p] - v1.values[h]).powi(2) + (sru[1][p] - v2.values[h]).powi(2) + sru[2][p].powi(2);
            }
        }
    }
    Ok(integrate_samples(&g, &vals).sqrt())
}

/// Runs the compressible system from ill-prepared data
/// `rho = rho~ + eps^m rho1`, `u = u0` next to the comparison pair built
/// from the smoothed data, accumulating the relative entropy budget inside
/// the same RK4 stages so its time integrals are fourth-order accurate.
pub fn run_limit(cfg: &LimitConfig, rho1: &ParityField, u0: &[ParityField; 3]) -> Result<LimitRun> {
    if !(cfg.cfl_fraction > 0.0 && cfg.cfl_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("cfl fraction must lie in (0, 1], got {}", cfg.cfl_fraction)));
    }
    if cfg.outputs == 0 || !(cfg.tau > 0.0) {
        return Err(Error::InvalidArgument("need tau > 0 and at least one output interval".into()));
    }
    let g = cfg.grid;
    let regime = cfg.regime;
    let solver = NsSolver::with_options(g, regime, cfg.eos, cfg.forces, cfg.viscosity)?;
    let mut warnings = support_warnings(rho1, u0);

    let mach = regime.mach();
    let rho0: Vec<f64> = solver.rho_tilde.values.iter().zip(&rho1.values).map(|(t, r)| t + mach * r).collect();
    let state0 = FluidState::new(ParityField::new(g, Parity::Even, rho0)?, u0.clone(), 0.0)?;
    let initial_energy = energy_functional(&state0, &solver.rho_tilde, &regime, &cfg.eos);

    let dec = decompose_initial_data(rho1, u0, &regime, cfg.delta)?;
    let qg0 = qg_initial_data(&dec.rho_delta, &dec.u_delta, regime.omega())?;
    let waves = WavePropagator::new(g, regime.omega())?;
    if waves.degenerate_modes() > 0 {
        warnings.push(format!("{} wave modes used the numeric eigensolver", waves.degenerate_modes()));
    }
    let coupled = Coupled { solver: &solver, waves: &waves, wave0: &dec.wave, delta: cfg.delta };

    let mut c = solver.to_conservative(&state0)?;
    let mut pi = qg0.pi.clone();
    let mut acc = ReiTerms::default();
    let mut tracker = BoundsTracker::new(regime.eps);
    let mut records = Vec::with_capacity(cfg.outputs + 1);
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut dt_cfl = 0.0;

    let mut e0 = f64::NAN;
    let mut observe = |t: f64, c: &Conservative, pi: &SpectralField, acc: &ReiTerms, tracker: &mut BoundsTracker| -> Result<(FluidState, TestFunctionPair)> {
        let state = solver.to_fluid(c, t)?;
        let pair = coupled.pair(t, pi)?;
        let e = relative_entropy(&state, &pair.r, &pair.u, &regime, &cfg.eos)?;
        if e0.is_nan() {
            e0 = e;
        }
        let dev: Vec<f64> = state.rho.values.iter().zip(&solver.rho_tilde.values).map(|(r, t)| r - t).collect();
        records.push(LimitRecord {
            t,
            eps: regime.eps,
            delta: cfg.delta,
            eeps: e,
            energy: energy_functional(&state, &solver.rho_tilde, &regime, &cfg.eos),
            mass: solver.mass(c),
            dens_dev: ParityField::new(g, Parity::Even, dev)?.l2_norm_sq().sqrt(),
            slack: e0 + acc.rhs() - e - acc.dissipation,
            integrated: *acc,
        });
        tracker.observe(&state, &solver.rho_tilde, &regime, &cfg.viscosity)?;
        Ok((state, pair))
    };

    let mut last = observe(0.0, &c, &pi, &acc, &mut tracker)?;
    for k in 1..=cfg.outputs {
        let t_next = cfg.tau * k as f64 / cfg.outputs as f64;
        while t < t_next * (1.0 - 1e-14) {
            if steps % DT_REFRESH == 0 {
                dt_cfl = cfg.cfl_fraction * solver.max_dt(&c)?;
            }
            let dt = dt_cfl.min(t_next - t);
            let k1 = coupled.eval(t, &c, &pi)?;
            let (c2, p2) = advance(&c, &pi, &k1, 0.5 * dt)?;
            let k2 = coupled.eval(t + 0.5 * dt, &c2, &p2)?;
            let (c3, p3) = advance(&c, &pi, &k2, 0.5 * dt)?;
            let k3 = coupled.eval(t + 0.5 * dt, &c3, &p3)?;
            let (c4, p4) = advance(&c, &pi, &k3, dt)?;
            let k4 = coupled.eval(t + dt, &c4, &p4)?;
            let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
            for (wi, s) in w.iter().zip([&k1, &k2, &k3, &k4]) {
                c = c.axpy(*wi, &s.dc)?;
                pi = pi.axpy(*wi, &s.dpi)?;
                acc = acc.axpy(*wi, &s.terms);
            }
            t += dt;
            steps += 1;
        }
        t = t_next;
        last = observe(t, &c, &pi, &acc, &mut tracker)?;
    }
    drop(observe);

    let (final_state, final_pair) = last;
    let v = euler_limit_velocity(&dec.u_delta, cfg.tau)?;
    let local_momentum_error = local_momentum_error(&final_state, &v, cfg.local_radius)?;
    Ok(LimitRun {
        config: *cfg,
        records,
        bounds: tracker.finish(),
        initial_energy,
        local_momentum_error,
        final_state,
        final_pair,
        steps,
        warnings,
    })
}
