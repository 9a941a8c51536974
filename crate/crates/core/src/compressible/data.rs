use super::eos::ScalingRegime;
use super::state::VELOCITY_PARITY;
use crate::error::{Error, Result};
use crate::numerics::smooth_step;
use crate::spectral::{dealias, transform_forward, transform_inverse, Parity, ParityField, SpectralField};
use crate::wave::{kernel_project, SpectralState4};

/// Spatial plateau radius and transition width of the smoothing at `delta`
/// on a box of side `length`: radius `min(1/delta, 0.3 L)`, width
/// `min(radius/2, 0.45 L - radius)`, so the cut stays inside the box.
pub fn spatial_cut(delta: f64, length: f64) -> (f64, f64) {
    let radius = (1.0 / delta).min(0.3 * length);
    (radius, (0.5 * radius).min(0.45 * length - radius))
}

/// Frequency multiplier: one on `[delta, 1/delta]`, smooth down to zero on
/// `[delta/2, delta]` and `[1/delta, 2/delta]`. The mean (`xi = 0`) is kept.
pub fn frequency_cut(xi: f64, delta: f64) -> f64 {
    if xi == 0.0 {
        1.0
    } else if xi < delta {
        smooth_step((xi - 0.5 * delta) / (0.5 * delta))
    } else if xi <= 1.0 / delta {
        1.0
    } else {
        1.0 - smooth_step((xi - 1.0 / delta) * delta)
    }
}

/// `[h]_delta`: multiplies by a smooth spatial bump centred in the box,
/// applies the horizontal frequency cut and drops vertical modes above
/// `floor(1/delta)`. The result is also 2/3-truncated, so it lies in the band
/// resolved by every solver (and the wave propagator evolves all of it).
pub fn smooth_truncate(h: &ParityField, delta: f64) -> Result<ParityField> {
    Ok(transform_inverse(&smooth_truncate_spectral(h, delta)?))
}

/// Spectral coefficients of [`smooth_truncate`].
pub fn smooth_truncate_spectral(h: &ParityField, delta: f64) -> Result<SpectralField> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let g = h.grid;
    let (radius, width) = spatial_cut(delta, g.length);
    let c = 0.5 * g.length;
    let bump = |x: f64, y: f64| 1.0 - smooth_step(((x - c).hypot(y - c) - radius) / width);
    let mut cut = h.clone();
    for k in 0..g.nz {
        for i2 in 0..g.ny {
            for i1 in 0..g.nx {
                cut.values[g.idx(i1, i2, k)] *= bump(g.x(i1), g.y(i2));
            }
        }
    }
    let kmax = (1.0 / delta).floor() as usize;
    Ok(dealias(&transform_forward(&cut)).map_modes(|i1, i2, k, z| {
        if k > kmax {
            return z * 0.0;
        }
        z * frequency_cut(g.xi1(i1).hypot(g.xi2(i2)), delta)
    }))
}

/// Smoothed data split into the kernel of `B(omega)` and its orthogonal
/// complement: `[rho1]_delta = s0 + q0`, `[u0]_delta = V0 + v0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDecomposition {
    pub rho_delta: SpectralField,
    pub u_delta: [SpectralField; 3],
    /// Wave part `(s0, V0)`.
    pub wave: SpectralState4,
    /// Balanced density `q0`, constant in `x_3`.
    pub q0: SpectralField,
    /// Balanced velocity `v0 = grad^perp q0 / omega`.
    pub v0: [SpectralField; 3],
}

impl InitialDecomposition {
    /// The balanced part as a four-component state.
    pub fn balanced(&self) -> Result<SpectralState4> {
        SpectralState4::new(self.q0.clone(), self.v0.clone(), self.wave.omega)
    }
}

pub fn decompose_initial_data(
    rho1: &ParityField,
    u0: &[ParityField; 3],
    regime: &ScalingRegime,
    delta: f64,
) -> Result<InitialDecomposition> {
    if rho1.parity != Parity::Even || u0.iter().zip(VELOCITY_PARITY).any(|(f, p)| f.parity != p) {
        return Err(Error::ShapeMismatch("density and velocity parities must be (even; even, even, odd)".into()));
    }
    let omega = regime.omega();
    let rho_delta = smooth_truncate_spectral(rho1, delta)?;
    let u_delta: [SpectralField; 3] = [
        smooth_truncate_spectral(&u0[0], delta)?,
        smooth_truncate_spectral(&u0[1], delta)?,
        smooth_truncate_spectral(&u0[2], delta)?,
    ];
    let (q0, v0) = kernel_project(&rho_delta, &u_delta, omega)?;
    let s0 = rho_delta.sub(&q0)?;
    let vw = [u_delta[0].sub(&v0[0])?, u_delta[1].sub(&v0[1])?, u_delta[2].sub(&v0[2])?];
    let wave = SpectralState4::new(s0, vw, omega)?;
    Ok(InitialDecomposition { rho_delta, u_delta, wave, q0, v0 })
}
