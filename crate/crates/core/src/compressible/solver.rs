use serde::{Deserialize, Serialize};

use super::eos::{EquationOfState, ScalingRegime};
use super::state::{static_state, FluidState, VELOCITY_PARITY};
use crate::error::{Error, Result};
use crate::spectral::{
    dealias, laplacian_h, spectral_derivative, transform_forward, transform_inverse, Axis, Grid, Parity, ParityField,
    SpectralField,
};

const AXES: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

/// Acoustic CFL number in `dt <= CFL eps^m min(dx, dz) / max c`.
pub const ACOUSTIC_CFL: f64 = 0.4;
/// Densities below this abort the run.
pub const VACUUM_GUARD: f64 = 1e-6;

/// Which body forces are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForceFlags {
    pub coriolis: bool,
    /// Without gravity the reference density is identically one.
    pub gravity: bool,
}

impl Default for ForceFlags {
    fn default() -> Self {
        ForceFlags { coriolis: true, gravity: true }
    }
}

/// Shear and bulk viscosity in `S = mu (grad u + grad u^T - 2/3 div u I) + eta div u I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viscosity {
    pub mu: f64,
    pub eta: f64,
}

impl Default for Viscosity {
    fn default() -> Self {
        Viscosity { mu: 1.0, eta: 0.0 }
    }
}

/// Conservative spectral variables: `sigma = rho - rho~` (even) and the
/// momentum `m = rho u` (even, even, odd), all 2/3-truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct Conservative {
    pub sigma: SpectralField,
    pub m: [SpectralField; 3],
}

impl Conservative {
    pub fn axpy(&self, a: f64, other: &Conservative) -> Result<Conservative> {
        Ok(Conservative {
            sigma: self.sigma.axpy(a, &other.sigma)?,
            m: [self.m[0].axpy(a, &other.m[0])?, self.m[1].axpy(a, &other.m[1])?, self.m[2].axpy(a, &other.m[2])?],
        })
    }

    fn check_finite(&self) -> Result<()> {
        let ok = std::iter::once(&self.sigma)
            .chain(self.m.iter())
            .all(|f| f.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        if ok {
            Ok(())
        } else {
            Err(Error::NonFinite("compressible state".into()))
        }
    }
}

/// Primitive fields and their spectral velocity, shared by the right-hand
/// side and the diagnostics.
pub struct Primitive {
    pub rho: ParityField,
    pub m: [ParityField; 3],
    pub u: [ParityField; 3],
}

/// Pseudo-spectral RK4 solver for the scaled rotating compressible
/// Navier-Stokes system in a horizontally periodic slab.
#[derive(Debug, Clone)]
pub struct NsSolver {
    pub grid: Grid,
    pub regime: ScalingRegime,
    pub eos: EquationOfState,
    pub forces: ForceFlags,
    pub viscosity: Viscosity,
    pub rho_tilde: ParityField,
}

impl NsSolver {
    pub fn new(grid: Grid, regime: ScalingRegime, eos: EquationOfState) -> Result<Self> {
        Self::with_options(grid, regime, eos, ForceFlags::default(), Viscosity::default())
    }

    pub fn with_options(
        grid: Grid,
        regime: ScalingRegime,
        eos: EquationOfState,
        forces: ForceFlags,
        viscosity: Viscosity,
    ) -> Result<Self> {
        if grid.nz < 2 {
            return Err(Error::InvalidDimension("the slab solver needs nz >= 2".into()));
        }
        let rho_tilde = if forces.gravity {
            static_state(&regime, &eos, grid)?
        } else {
            ParityField::new(grid, Parity::Even, vec![1.0; grid.len()])?
        };
        Ok(NsSolver { grid, regime, eos, forces, viscosity, rho_tilde })
    }

    pub fn to_conservative(&self, s: &FluidState) -> Result<Conservative> {
        if s.grid() != self.grid {
            return Err(Error::ShapeMismatch("state grid differs from solver grid".into()));
        }
        let sigma: Vec<f64> = s.rho.values.iter().zip(&self.rho_tilde.values).map(|(r, t)| r - t).collect();
        let sigma = dealias(&transform_forward(&ParityField::new(self.grid, Parity::Even, sigma)?));
        let m = std::array::from_fn(|i| {
            let vals = s.rho.values.iter().zip(&s.u[i].values).map(|(r, u)| r * u).collect();
            dealias(&transform_forward(&ParityField { grid: self.grid, parity: VELOCITY_PARITY[i], values: vals }))
        });
        Ok(Conservative { sigma, m })
    }

    pub fn primitive(&self, c: &Conservative) -> Result<Primitive> {
        let sigma = transform_inverse(&c.sigma);
        let rho_vals: Vec<f64> = sigma.values.iter().zip(&self.rho_tilde.values).map(|(s, t)| s + t).collect();
        let min = rho_vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min.is_nan() || rho_vals.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("density".into()));
        }
        if min < VACUUM_GUARD {
            return Err(Error::Vacuum(min));
        }
        let rho = ParityField { grid: self.grid, parity: Parity::Even, values: rho_vals };
        let m: [ParityField; 3] = std::array::from_fn(|i| transform_inverse(&c.m[i]));
        let u = std::array::from_fn(|i| {
            let vals = m[i].values.iter().zip(&rho.values).map(|(m, r)| m / r).collect();
            ParityField { grid: self.grid, parity: VELOCITY_PARITY[i], values: vals }
        });
        Ok(Primitive { rho, m, u })
    }

    pub fn to_fluid(&self, c: &Conservative, time: f64) -> Result<FluidState> {
        let p = self.primitive(c)?;
        FluidState::new(p.rho, p.u, time)
    }

    /// `int rho`, exact in the spectral representation.
    pub fn mass(&self, c: &Conservative) -> f64 {
        self.rho_tilde.integrate() + c.sigma.coeffs[0].re * self.grid.area()
    }

    /// Largest stable step from the acoustic CFL rule.
    pub fn max_dt(&self, c: &Conservative) -> Result<f64> {
        let p = self.primitive(c)?;
        let cmax = p.rho.values.iter().map(|r| self.eos.sound_speed(*r)).fold(0.0, f64::max);
        let umax = (0..self.grid.len())
            .map(|i| (p.u[0].values[i].powi(2) + p.u[1].values[i].powi(2) + p.u[2].values[i].powi(2)).sqrt())
            .fold(0.0, f64::max);
        let h = self.grid.dx().min(self.grid.dy()).min(self.grid.dz());
        // the advective speed is negligible next to sound at low Mach number but keeps eps = 1 runs honest
        Ok(ACOUSTIC_CFL * h / (cmax / self.regime.mach() + umax))
    }

    /// Spectral viscous force `eps^alpha div S(grad u)` from a spectral velocity.
    pub fn viscous_force(&self, u_hat: &[SpectralField; 3]) -> Result<[SpectralField; 3]> {
        let Viscosity { mu, eta } = self.viscosity;
        let div = divergence(u_hat)?;
        let mut out: Vec<SpectralField> = Vec::with_capacity(3);
        for i in 0..3 {
            let lap = laplacian_h(&u_hat[i]).add(&spectral_derivative(&u_hat[i], Axis::X3, 2)?)?;
            let grad_div = spectral_derivative(&div, AXES[i], 1)?;
            out.push(lap.scaled(mu).axpy(mu / 3.0 + eta, &grad_div)?.scaled(self.regime.viscosity()));
        }
        Ok(out.try_into().expect("three components"))
    }

    /// Time derivative of the conservative variables.
    pub fn rhs(&self, c: &Conservative) -> Result<Conservative> {
        let g = self.grid;
        let p = self.primitive(c)?;
        let dsigma = divergence(&c.m)?.scaled(-1.0);

        // flux divergence of rho u (x) u
        let mut mom: Vec<SpectralField> = (0..3).map(|i| SpectralField::zeros(g, VELOCITY_PARITY[i])).collect();
        for i in 0..3 {
            for j in i..3 {
                let parity = if VELOCITY_PARITY[i] == VELOCITY_PARITY[j] { Parity::Even } else { Parity::Odd };
                let vals = p.m[i].values.iter().zip(&p.u[j].values).map(|(a, b)| a * b).collect();
                let f = transform_forward(&ParityField { grid: g, parity, values: vals });
                mom[i] = mom[i].sub(&spectral_derivative(&f, AXES[j], 1)?)?;
                if i != j {
                    mom[j] = mom[j].sub(&spectral_derivative(&f, AXES[i], 1)?)?;
                }
            }
        }

        // well-balanced pressure and gravity: -eps^{-2m} rho grad(H'(rho) - H'(rho~))
        let phi: Vec<f64> = p
            .rho
            .values
            .iter()
            .zip(&self.rho_tilde.values)
            .map(|(r, t)| self.eos.h_prime_increment(*t, r - t))
            .collect();
        let phi = transform_forward(&ParityField { grid: g, parity: Parity::Even, values: phi });
        let a = self.regime.pressure_factor();
        for i in 0..3 {
            let d = transform_inverse(&spectral_derivative(&phi, AXES[i], 1)?);
            let vals = d.values.iter().zip(&p.rho.values).map(|(d, r)| -a * r * d).collect();
            let f = transform_forward(&ParityField { grid: g, parity: VELOCITY_PARITY[i], values: vals });
            mom[i] = mom[i].add(&f)?;
        }

        if self.forces.coriolis {
            // -(1/eps) f x m with f x m = (-m_2, m_1, 0)
            let k = 1.0 / self.regime.eps;
            mom[0] = mom[0].axpy(k, &c.m[1])?;
            mom[1] = mom[1].axpy(-k, &c.m[0])?;
        }

        let u_hat: [SpectralField; 3] = std::array::from_fn(|i| transform_forward(&p.u[i]));
        let visc = self.viscous_force(&u_hat)?;
        for i in 0..3 {
            mom[i] = mom[i].add(&visc[i])?;
        }

        let m: [SpectralField; 3] = std::array::from_fn(|i| dealias(&mom[i]));
        Ok(Conservative { sigma: dealias(&dsigma), m })
    }

    /// One classical RK4 step.
    pub fn step(&self, c: &Conservative, dt: f64) -> Result<Conservative> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let limit = self.max_dt(c)?;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let k1 = self.rhs(c)?;
        let k2 = self.rhs(&c.axpy(0.5 * dt, &k1)?)?;
        let k3 = self.rhs(&c.axpy(0.5 * dt, &k2)?)?;
        let k4 = self.rhs(&c.axpy(dt, &k3)?)?;
        let next = c
            .axpy(dt / 6.0, &k1)?
            .axpy(dt / 3.0, &k2)?
            .axpy(dt / 3.0, &k3)?
            .axpy(dt / 6.0, &k4)?;
        next.check_finite()?;
        Ok(next)
    }
}

/// `div` of a spectral vector field with parities (even, even, odd).
pub fn divergence(v: &[SpectralField; 3]) -> Result<SpectralField> {
    spectral_derivative(&v[0], Axis::X1, 1)?
        .add(&spectral_derivative(&v[1], Axis::X2, 1)?)?
        .add(&spectral_derivative(&v[2], Axis::X3, 1)?)
}

/// One RK4 step of the scaled Navier-Stokes system with default forces and
/// viscosity.
pub fn ns_step(state: &FluidState, regime: &ScalingRegime, eos: &EquationOfState, dt: f64) -> Result<FluidState> {
    let solver = NsSolver::new(state.grid(), *regime, *eos)?;
    let c = solver.to_conservative(state)?;
    solver.to_fluid(&solver.step(&c, dt)?, state.time + dt)
}
