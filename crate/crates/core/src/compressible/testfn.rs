use super::eos::ScalingRegime;
use crate::error::{Error, Result};
use crate::limit::{qg_tendency, QgState};
use crate::spectral::{embed_constant_in_z, perp_grad, transform_inverse, ParityField, SpectralField};
use crate::wave::{apply_b, SpectralState4};

/// Smooth comparison pair `r = rho~ + eps^m (q + s)`, `U = v + V`, built from
/// a wave state `(s, V)` and a quasi-geostrophic state with stream function
/// `q~`, where `q = omega q~` and `v = grad_h^perp q~`.
#[derive(Debug, Clone)]
pub struct TestFunctionPair {
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    pub r: ParityField,
    pub u: [ParityField; 3],
    pub dr_dt: ParityField,
    pub du_dt: [ParityField; 3],
    /// Balanced density `q` on the three-dimensional grid.
    pub q: SpectralField,
    /// Balanced velocity `(v_1, v_2, 0)`.
    pub v: [SpectralField; 3],
    pub wave: SpectralState4,
}

impl TestFunctionPair {
    /// `omega f x v + grad q`, which vanishes for balanced pairs.
    pub fn balance_residual(&self, omega: f64) -> Result<f64> {
        use crate::spectral::{spectral_derivative, Axis};
        let b1 = spectral_derivative(&self.q, Axis::X1, 1)?.axpy(-omega, &self.v[1])?;
        let b2 = spectral_derivative(&self.q, Axis::X2, 1)?.axpy(omega, &self.v[0])?;
        Ok(b1.max_abs_coeff().max(b2.max_abs_coeff()))
    }
}

/// Assembles the comparison pair at time `t` from a wave state already
/// evolved to the fast time `t / eps^m` and a quasi-geostrophic state at `t`.
pub fn build_test_functions(
    t: f64,
    regime: &ScalingRegime,
    delta: f64,
    wave: &SpectralState4,
    qg: &QgState,
    rho_tilde: &ParityField,
) -> Result<TestFunctionPair> {
    let g = wave.grid();
    let omega = regime.omega();
    if qg.grid() != g.horizontal() || rho_tilde.grid != g {
        return Err(Error::ShapeMismatch("wave, QG and static grids disagree".into()));
    }
    if (qg.omega - omega).abs() > 1e-14 * omega || (wave.omega - omega).abs() > 1e-14 * omega {
        return Err(Error::InvalidArgument(format!("states must use omega = eps^(m-1) = {omega}")));
    }
    let mach = regime.mach();

    let stream = qg.stream()?;
    let dstream = QgState { pi: qg_tendency(&qg.pi, omega)?, omega, time: qg.time }.stream()?;
    let lift = |f: &SpectralField| embed_constant_in_z(f, g);
    let q = lift(&stream)?.scaled(omega);
    let (v1, v2) = perp_grad(&stream)?;
    let v = [lift(&v1)?, lift(&v2)?, SpectralField::zeros(g, wave.v[2].parity)];
    let (dv1, dv2) = perp_grad(&dstream)?;

    let bw = apply_b(wave)?;
    let fast = -1.0 / mach;

    let pert = transform_inverse(&q.add(&wave.s)?);
    let r = ParityField {
        grid: g,
        parity: rho_tilde.parity,
        values: rho_tilde.values.iter().zip(&pert.values).map(|(t, p)| t + mach * p).collect(),
    };
    if let Some(bad) = r.values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Positivity(format!(
            "test density {bad:.3e} at eps = {}; reduce eps or the data amplitude",
            regime.eps
        )));
    }
    let dr = lift(&dstream)?.scaled(omega).axpy(fast, &bw.s)?;
    let dr_dt = transform_inverse(&dr.scaled(mach));
    let u = [
        transform_inverse(&v[0].add(&wave.v[0])?),
        transform_inverse(&v[1].add(&wave.v[1])?),
        transform_inverse(&wave.v[2]),
    ];
    let du_dt = [
        transform_inverse(&lift(&dv1)?.axpy(fast, &bw.v[0])?),
        transform_inverse(&lift(&dv2)?.axpy(fast, &bw.v[1])?),
        transform_inverse(&bw.v[2].scaled(fast)),
    ];
    Ok(TestFunctionPair { t, eps: regime.eps, delta, r, u, dr_dt, du_dt, q, v, wave: wave.clone() })
}
