use num_complex::Complex64;
use rayon::prelude::*;

use super::matrix::{eigenbasis, propagate_mode, EigenSystem, ModeState};
use crate::error::{Error, Result};
use crate::spectral::{
    curl_h, embed_constant_in_z, invert_helmholtz_h, spectral_derivative, vertical_average, Axis, Grid, Parity,
    SpectralField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(s, V_1, V_2, V_3)` in spectral form: `s`, `V_1`, `V_2` even and `V_3` odd,
/// so `V_3` vanishes on the horizontal boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState4 {
    pub s: SpectralField,
    pub v: [SpectralField; 3],
    pub omega: f64,
    /// Modes handled by the generic eigensolver during the last evolution.
    pub degenerate_modes: usize,
}

impl SpectralState4 {
    pub fn new(s: SpectralField, v: [SpectralField; 3], omega: f64) -> Result<Self> {
        for f in &v {
            if f.grid != s.grid {
                return Err(Error::ShapeMismatch("state components live on different grids".into()));
            }
        }
        let want = [Parity::Even, Parity::Even, Parity::Even, Parity::Odd];
        let got = [s.parity, v[0].parity, v[1].parity, v[2].parity];
        if want != got {
            return Err(Error::ShapeMismatch(format!("expected parities {want:?}, got {got:?}")));
        }
        if !(omega >= 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be >= 0, got {omega}")));
        }
        Ok(SpectralState4 { s, v, omega, degenerate_modes: 0 })
    }

    pub fn zeros(grid: Grid, omega: f64) -> Self {
        let e = || SpectralField::zeros(grid, Parity::Even);
        SpectralState4 {
            s: e(),
            v: [e(), e(), SpectralField::zeros(grid, Parity::Odd)],
            omega,
            degenerate_modes: 0,
        }
    }

    pub fn grid(&self) -> Grid {
        self.s.grid
    }

    pub fn components(&self) -> [&SpectralField; 4] {
        [&self.s, &self.v[0], &self.v[1], &self.v[2]]
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&SpectralField, &SpectralField) -> Result<SpectralField>) -> Result<Self> {
        Ok(SpectralState4 {
            s: f(&self.s, &other.s)?,
            v: [f(&self.v[0], &other.v[0])?, f(&self.v[1], &other.v[1])?, f(&self.v[2], &other.v[2])?],
            omega: self.omega,
            degenerate_modes: 0,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, SpectralField::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, SpectralField::sub)
    }

    /// `<self, other>` in `L^2(Omega)` summed over the four components.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in self.components().into_iter().zip(other.components()) {
            total += a.inner(b)?;
        }
        Ok(total)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.components().iter().map(|f| f.l2_norm_sq()).sum()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.components()
            .into_iter()
            .zip(other.components())
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components().iter().map(|f| f.max_abs_coeff()).fold(0.0, f64::max)
    }

    /// Drops the modes the propagator does not evolve.
    pub fn without_nyquist(&self) -> Self {
        SpectralState4 {
            s: self.s.without_nyquist(),
            v: [self.v[0].without_nyquist(), self.v[1].without_nyquist(), self.v[2].without_nyquist()],
            omega: self.omega,
            degenerate_modes: self.degenerate_modes,
        }
    }

    /// Mode vector at `(i1, i2, kappa)`; the odd `V_3` sine coefficient `c`
    /// enters as `-i c` so that the evolution reads `X' + i A X = 0`.
    fn mode(&self, idx: usize) -> ModeState {
        ModeState {
            s_hat: self.s.coeffs[idx],
            v_hat: [self.v[0].coeffs[idx], self.v[1].coeffs[idx], -I * self.v[2].coeffs[idx]],
        }
    }

    fn set_mode(&mut self, idx: usize, m: &ModeState) {
        self.s.coeffs[idx] = m.s_hat;
        self.v[0].coeffs[idx] = m.v_hat[0];
        self.v[1].coeffs[idx] = m.v_hat[1];
        self.v[2].coeffs[idx] = I * m.v_hat[2];
    }
}

fn evolved_mode(grid: &Grid, i1: usize, i2: usize, kappa: usize) -> bool {
    !(grid.is_nyquist_x(i1) || grid.is_nyquist_y(i2) || (grid.nz > 1 && kappa == grid.top_mode()))
}

/// Eigen-decompositions of every evolved mode of a grid at fixed `omega`.
///
/// The horizontal Nyquist rows and the top vertical mode are not evolved and
/// are returned as zero.
#[derive(Debug, Clone)]
pub struct WavePropagator {
    grid: Grid,
    omega: f64,
    systems: Vec<Option<EigenSystem>>,
    degenerate: usize,
}

impl WavePropagator {
    pub fn new(grid: Grid, omega: f64) -> Result<Self> {
        if !(omega >= 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be >= 0, got {omega}")));
        }
        let systems = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let i1 = idx % grid.nx;
                let i2 = (idx / grid.nx) % grid.ny;
                let kappa = idx / grid.plane_len();
                if !evolved_mode(&grid, i1, i2, kappa) {
                    return Ok(None);
                }
                eigenbasis([grid.xi1(i1), grid.xi2(i2)], grid.kz(kappa), omega).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        let degenerate = systems.iter().flatten().filter(|e| e.degenerate).count();
        Ok(WavePropagator { grid, omega, systems, degenerate })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn degenerate_modes(&self) -> usize {
        self.degenerate
    }

    pub fn system(&self, i1: usize, i2: usize, kappa: usize) -> Option<&EigenSystem> {
        self.systems[self.grid.idx(i1, i2, kappa)].as_ref()
    }

    pub fn evolve(&self, state: &SpectralState4, t: f64) -> Result<SpectralState4> {
        if state.grid() != self.grid {
            return Err(Error::ShapeMismatch("state grid differs from propagator grid".into()));
        }
        if state.omega != self.omega {
            return Err(Error::InvalidArgument(format!(
                "state omega {} differs from propagator omega {}",
                state.omega, self.omega
            )));
        }
        let modes: Vec<Option<ModeState>> = self
            .systems
            .par_iter()
            .enumerate()
            .map(|(idx, sys)| sys.as_ref().map(|e| propagate_mode(&state.mode(idx), t, e)))
            .collect();
        let mut out = SpectralState4::zeros(self.grid, self.omega);
        let blank = ModeState { s_hat: ZERO, v_hat: [ZERO; 3] };
        for (idx, m) in modes.iter().enumerate() {
            out.set_mode(idx, m.as_ref().unwrap_or(&blank));
        }
        out.degenerate_modes = self.degenerate;
        Ok(out)
    }
}

/// Solution at time `t` of `d/dt (s, V) + B(omega) (s, V) = 0`.
pub fn evolve(state: &SpectralState4, t: f64) -> Result<SpectralState4> {
    WavePropagator::new(state.grid(), state.omega)?.evolve(state, t)
}

/// Orthogonal projection of `(r, U)` onto the kernel of `B(omega)`.
///
/// The kernel consists of `(q, grad_h^perp q / omega, 0)` with `q`
/// independent of `x_3`; the projection solves
/// `-Delta_h q + omega^2 q = omega^2 avg(r) - omega curl_h avg(U_h)`.
/// The horizontal Nyquist rows of `q` are dropped so the result is an exact
/// kernel element.
pub fn kernel_project(r: &SpectralField, u: &[SpectralField; 3], omega: f64) -> Result<(SpectralField, [SpectralField; 3])> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel projection needs omega > 0, got {omega}")));
    }
    if r.parity != Parity::Even || u[0].parity != Parity::Even || u[1].parity != Parity::Even {
        return Err(Error::ShapeMismatch("r and U_h must be even".into()));
    }
    let grid = r.grid;
    let rbar = vertical_average(r);
    let curl = curl_h(&vertical_average(&u[0]), &vertical_average(&u[1]))?;
    let rhs = rbar.scaled(omega * omega).axpy(-omega, &curl)?;
    let q = embed_constant_in_z(&invert_helmholtz_h(&rhs, omega)?.without_nyquist(), grid)?;
    let v1 = spectral_derivative(&q, Axis::X2, 1)?.scaled(-1.0 / omega);
    let v2 = spectral_derivative(&q, Axis::X1, 1)?.scaled(1.0 / omega);
    Ok((q, [v1, v2, SpectralField::zeros(grid, Parity::Odd)]))
}

/// `B(omega)(s, V) = (div V, omega f x V + grad s)` with `f x V = (-V_2, V_1, 0)`.
pub fn apply_b(state: &SpectralState4) -> Result<SpectralState4> {
    let w = state.omega;
    let [v1, v2, v3] = &state.v;
    let div = spectral_derivative(v1, Axis::X1, 1)?
        .add(&spectral_derivative(v2, Axis::X2, 1)?)?
        .add(&spectral_derivative(v3, Axis::X3, 1)?)?;
    let b1 = spectral_derivative(&state.s, Axis::X1, 1)?.axpy(-w, v2)?;
    let b2 = spectral_derivative(&state.s, Axis::X2, 1)?.axpy(w, v1)?;
    let b3 = spectral_derivative(&state.s, Axis::X3, 1)?;
    Ok(SpectralState4 { s: div, v: [b1, b2, b3], omega: w, degenerate_modes: 0 })
}
