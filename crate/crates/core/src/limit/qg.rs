use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{
    curl_h, dealias, invert_helmholtz_h, perp_grad, spectral_derivative, transform_forward, transform_inverse,
    vertical_average, Axis, Grid, Parity, ParityField, SpectralField,
};

/// The time step is recomputed from the CFL rule every this many steps.
pub const DT_REFRESH_STEPS: usize = 10;
const MAX_CFL: f64 = 0.5;

/// Potential vorticity `Pi = (Delta_h - omega^2) q` on a horizontal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QgState {
    pub pi: SpectralField,
    pub omega: f64,
    pub time: f64,
}

/// Vorticity of a planar incompressible flow; the `omega = 0` case of
/// [`QgState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Vorticity2D {
    pub zeta: SpectralField,
}

impl Vorticity2D {
    pub fn new(zeta: SpectralField) -> Result<Self> {
        check_horizontal(&zeta)?;
        Ok(Vorticity2D { zeta: dealias(&zeta) })
    }

    pub fn as_qg(&self) -> QgState {
        QgState { pi: self.zeta.clone(), omega: 0.0, time: 0.0 }
    }
}

fn check_horizontal(f: &SpectralField) -> Result<()> {
    if !f.grid.is_horizontal() || f.parity != Parity::Even {
        return Err(Error::ShapeMismatch("expected an even horizontal field".into()));
    }
    Ok(())
}

impl QgState {
    pub fn new(pi: SpectralField, omega: f64) -> Result<Self> {
        check_horizontal(&pi)?;
        if !(omega >= 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be >= 0, got {omega}")));
        }
        // validates solvability at omega = 0
        invert_helmholtz_h(&pi, omega)?;
        Ok(QgState { pi: dealias(&pi), omega, time: 0.0 })
    }

    /// `Pi` from a stream function: `(Delta_h - omega^2) q`.
    pub fn from_stream(q: &SpectralField, omega: f64) -> Result<Self> {
        let g = q.grid;
        let w2 = omega * omega;
        let pi = q.map_modes(|i1, i2, _, c| {
            let (a, b) = (g.xi1(i1), g.xi2(i2));
            -c * (a * a + b * b + w2)
        });
        Self::new(pi, omega)
    }

    pub fn grid(&self) -> Grid {
        self.pi.grid
    }

    /// `q = (Delta_h - omega^2)^{-1} Pi`.
    pub fn stream(&self) -> Result<SpectralField> {
        Ok(invert_helmholtz_h(&self.pi, self.omega)?.scaled(-1.0))
    }
}

/// `v = grad_h^perp q`.
pub fn velocity_from_q(state: &QgState) -> Result<[SpectralField; 2]> {
    let (v1, v2) = perp_grad(&state.stream()?)?;
    Ok([v1, v2])
}

/// `int |grad q|^2 + omega^2 q^2` by Parseval.
pub fn qg_energy(state: &QgState) -> Result<f64> {
    let q = state.stream()?;
    let g = q.grid;
    let w2 = state.omega * state.omega;
    let weighted = q.map_modes(|i1, i2, _, c| {
        let (a, b) = (g.xi1(i1), g.xi2(i2));
        c * (a * a + b * b + w2).sqrt()
    });
    Ok(weighted.l2_norm_sq())
}

/// `int Pi^2`.
pub fn enstrophy(state: &QgState) -> f64 {
    state.pi.l2_norm_sq()
}

/// `max |Pi|` on the grid.
pub fn maxvort(state: &QgState) -> f64 {
    transform_inverse(&state.pi).max_abs()
}

fn physical(f: &SpectralField) -> ParityField {
    transform_inverse(f)
}

/// Largest speed on the grid.
fn max_speed(v: &[SpectralField; 2]) -> f64 {
    let (a, b) = (physical(&v[0]), physical(&v[1]));
    a.values.iter().zip(&b.values).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max)
}

/// `-P_{2/3}(v . grad Pi)` with `v = grad^perp (Delta - omega^2)^{-1} Pi`.
pub fn qg_tendency(pi: &SpectralField, omega: f64) -> Result<SpectralField> {
    let probe = QgState { pi: pi.clone(), omega, time: 0.0 };
    let v = velocity_from_q(&probe)?;
    let d1 = physical(&spectral_derivative(pi, Axis::X1, 1)?);
    let d2 = physical(&spectral_derivative(pi, Axis::X2, 1)?);
    let (v1, v2) = (physical(&v[0]), physical(&v[1]));
    let adv: Vec<f64> = (0..d1.values.len())
        .map(|i| v1.values[i] * d1.values[i] + v2.values[i] * d2.values[i])
        .collect();
    let adv = ParityField::new(pi.grid, Parity::Even, adv)?;
    let mut out = dealias(&transform_forward(&adv)).scaled(-1.0);
    // the mean of an exact divergence; remove round-off so omega = 0 stays solvable
    out.coeffs[0] = Complex64::new(0.0, 0.0);
    Ok(out)
}

fn check_finite(f: &SpectralField) -> Result<()> {
    if f.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("potential vorticity".into()))
    }
}

/// One classical RK4 step of the quasi-geostrophic equation.
pub fn qg_step(state: &QgState, dt: f64) -> Result<QgState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let g = state.grid();
    let v = velocity_from_q(state)?;
    let limit = MAX_CFL * g.dx().min(g.dy()) / max_speed(&v).max(f64::MIN_POSITIVE);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let w = state.omega;
    let p0 = &state.pi;
    let k1 = qg_tendency(p0, w)?;
    let k2 = qg_tendency(&p0.axpy(0.5 * dt, &k1)?, w)?;
    let k3 = qg_tendency(&p0.axpy(0.5 * dt, &k2)?, w)?;
    let k4 = qg_tendency(&p0.axpy(dt, &k3)?, w)?;
    let incr = k1.add(&k4)?.axpy(2.0, &k2)?.axpy(2.0, &k3)?;
    let pi = p0.axpy(dt / 6.0, &incr)?;
    check_finite(&pi)?;
    Ok(QgState { pi, omega: w, time: state.time + dt })
}

/// One RK4 step of planar Euler in vorticity form.
pub fn euler_step(zeta: &Vorticity2D, dt: f64) -> Result<Vorticity2D> {
    Ok(Vorticity2D { zeta: qg_step(&zeta.as_qg(), dt)?.pi })
}

/// Pressure of planar Euler, `-Delta p = div div (v (x) v)`, mean zero.
pub fn euler_pressure(zeta: &Vorticity2D) -> Result<SpectralField> {
    let v = velocity_from_q(&zeta.as_qg())?;
    let (a, b) = (physical(&v[0]), physical(&v[1]));
    let g = zeta.zeta.grid;
    let prod = |f: &dyn Fn(usize) -> f64| -> Result<SpectralField> {
        let vals = (0..g.len()).map(f).collect();
        Ok(dealias(&transform_forward(&ParityField::new(g, Parity::Even, vals)?)))
    };
    let m11 = prod(&|i| a.values[i] * a.values[i])?;
    let m12 = prod(&|i| a.values[i] * b.values[i])?;
    let m22 = prod(&|i| b.values[i] * b.values[i])?;
    let dd = spectral_derivative(&m11, Axis::X1, 2)?
        .add(&spectral_derivative(&spectral_derivative(&m12, Axis::X1, 1)?, Axis::X2, 1)?.scaled(2.0))?
        .add(&spectral_derivative(&m22, Axis::X2, 2)?)?;
    let mut rhs = dd;
    rhs.coeffs[0] = Complex64::new(0.0, 0.0);
    invert_helmholtz_h(&rhs, 0.0)
}

/// Balanced initial data from (already smoothed) density and velocity
/// perturbations on a three-dimensional grid:
/// `Pi_0 = curl_h avg(u_h) - omega avg(rho)`.
pub fn qg_initial_data(rho1: &SpectralField, u: &[SpectralField; 3], omega: f64) -> Result<QgState> {
    if rho1.parity != Parity::Even || u[0].parity != Parity::Even || u[1].parity != Parity::Even {
        return Err(Error::ShapeMismatch("density and horizontal velocity must be even".into()));
    }
    let curl = curl_h(&vertical_average(&u[0]), &vertical_average(&u[1]))?;
    let pi = curl.axpy(-omega, &vertical_average(rho1))?.without_nyquist();
    QgState::new(pi, omega)
}

/// Integration controls for [`integrate_qg`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgOptions {
    /// `dt = cfl * dx / max|v|`, at most 0.5.
    pub cfl: f64,
    /// Record a diagnostic row every this many steps (the final time is
    /// always recorded).
    pub record_every: usize,
    /// Optional exponential filter `exp(-36 (|j|/j_max)^order)` applied after
    /// each step.
    pub filter_order: Option<u32>,
    /// Upper bound on the time step, e.g. to share steps with another solver.
    pub max_dt: f64,
}

impl Default for QgOptions {
    fn default() -> Self {
        QgOptions { cfl: 0.4, record_every: 1, filter_order: None, max_dt: f64::INFINITY }
    }
}

/// One row of the `t,energy,enstrophy,maxvort` time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QgRecord {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub maxvort: f64,
}

fn record(state: &QgState) -> Result<QgRecord> {
    Ok(QgRecord { t: state.time, energy: qg_energy(state)?, enstrophy: enstrophy(state), maxvort: maxvort(state) })
}

fn filter(f: &SpectralField, order: u32) -> SpectralField {
    let g = f.grid;
    let (hx, hy) = ((g.nx / 2) as f64, (g.ny / 2) as f64);
    f.map_modes(|i1, i2, _, c| {
        let a = Grid::signed_index(i1, g.nx) as f64 / hx;
        let b = Grid::signed_index(i2, g.ny) as f64 / hy;
        c * (-36.0 * (a * a + b * b).sqrt().powi(order as i32)).exp()
    })
}

/// Integrates to `t_end` with the CFL step recomputed every
/// [`DT_REFRESH_STEPS`] steps; the last step is shortened to land on `t_end`.
pub fn integrate_qg(state: &QgState, t_end: f64, opts: &QgOptions) -> Result<(QgState, Vec<QgRecord>)> {
    if !(opts.cfl > 0.0 && opts.cfl <= MAX_CFL) {
        return Err(Error::InvalidArgument(format!("cfl must lie in (0, 0.5], got {}", opts.cfl)));
    }
    let g = state.grid();
    let dx = g.dx().min(g.dy());
    let mut s = state.clone();
    let mut rows = vec![record(&s)?];
    let mut dt = 0.0;
    let mut step = 0usize;
    while s.time < t_end * (1.0 - 1e-14) {
        if step % DT_REFRESH_STEPS == 0 {
            let vmax = max_speed(&velocity_from_q(&s)?);
            dt = if vmax > 0.0 { opts.cfl * dx / vmax } else { t_end - s.time };
            dt = dt.min(opts.max_dt);
        }
        let h = dt.min(t_end - s.time);
        s = qg_step(&s, h)?;
        if let Some(order) = opts.filter_order {
            s.pi = filter(&s.pi, order);
        }
        step += 1;
        let last = s.time >= t_end * (1.0 - 1e-14);
        if step % opts.record_every.max(1) == 0 || last {
            rows.push(record(&s)?);
        }
    }
    Ok((s, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn field(g: Grid, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        transform_forward(&ParityField::from_fn(g, Parity::Even, |x, y, _| f(x, y)))
    }

    fn dipole(g: Grid) -> SpectralField {
        let c = 0.5 * g.length;
        field(g, |x, y| {
            let a = (-((x - c - 0.6).powi(2) + (y - c).powi(2)) / 0.3).exp();
            let b = (-((x - c + 0.6).powi(2) + (y - c).powi(2)) / 0.3).exp();
            4.0 * (a - b)
        })
    }

    #[test]
    fn energy_of_single_mode() {
        let g = make_grid(16, 16, 1, 2.0 * PI).unwrap();
        let (amp, w) = (0.7, 0.5);
        let q = field(g, |x, y| amp * (2.0 * x + y).cos());
        let s = QgState::from_stream(&q, w).unwrap();
        let e = qg_energy(&s).unwrap();
        let exact = (5.0 + w * w) * amp * amp * g.area() / 2.0;
        assert!((e - exact).abs() < 1e-12 * exact);
        let zero = QgState::new(SpectralField::zeros(g, Parity::Even), w).unwrap();
        assert_eq!(qg_energy(&zero).unwrap(), 0.0);
    }

    #[test]
    fn velocity_is_divergence_free() {
        let g = make_grid(32, 32, 1, 2.0 * PI).unwrap();
        let s = QgState::new(dipole(g), 0.3).unwrap();
        let v = velocity_from_q(&s).unwrap();
        let div = crate::spectral::div_h(&v[0], &v[1]).unwrap();
        assert!(div.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn velocity_single_mode_value() {
        // q = cos(x) -> v = (0, -sin(x)), coefficient of v_2 at xi = 1 is -1/(2i) = i/2
        let g = make_grid(8, 8, 1, 2.0 * PI).unwrap();
        let s = QgState::from_stream(&field(g, |x, _| x.cos()), 0.4).unwrap();
        let v = velocity_from_q(&s).unwrap();
        assert!(v[0].max_abs_coeff() < 1e-15);
        assert!((v[1].get(1, 0, 0) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn shear_mode_is_steady() {
        let g = make_grid(32, 32, 1, 2.0 * PI).unwrap();
        let z = Vorticity2D::new(field(g, |x, _| x.cos())).unwrap();
        let next = euler_step(&z, 0.05).unwrap();
        assert!(next.zeta.max_diff(&z.zeta) < 1e-14);
    }

    #[test]
    fn omega_zero_is_euler() {
        let g = make_grid(32, 32, 1, 2.0 * PI).unwrap();
        let mut d = dipole(g);
        d.coeffs[0] = Complex64::new(0.0, 0.0);
        let z = Vorticity2D::new(d.clone()).unwrap();
        let q = QgState::new(d, 0.0).unwrap();
        let a = euler_step(&z, 0.01).unwrap();
        let b = qg_step(&q, 0.01).unwrap();
        assert!(a.zeta.max_diff(&b.pi) < 1e-13);
    }

    #[test]
    fn omega_zero_rejects_mean() {
        let g = make_grid(8, 8, 1, 2.0 * PI).unwrap();
        let c = field(g, |_, _| 1.0);
        assert!(matches!(QgState::new(c, 0.0), Err(Error::SingularInversion(_))));
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = make_grid(32, 32, 1, 2.0 * PI).unwrap();
        let s = QgState::new(dipole(g), 0.5).unwrap();
        assert!(matches!(qg_step(&s, 10.0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn energy_and_enstrophy_conserved() {
        let g = make_grid(64, 64, 1, 2.0 * PI).unwrap();
        let s = QgState::new(dipole(g), 0.5).unwrap();
        let (_, rows) = integrate_qg(&s, 0.5, &QgOptions::default()).unwrap();
        let (e0, z0) = (rows[0].energy, rows[0].enstrophy);
        for r in &rows {
            assert!((r.energy - e0).abs() < 1e-6 * e0);
            assert!((r.enstrophy - z0).abs() < 1e-6 * z0);
        }
    }

    #[test]
    fn initial_data_from_rotational_flow() {
        let g = make_grid(16, 16, 5, 2.0 * PI).unwrap();
        let psi = field(g, |x, y| (x + y).sin());
        let (u1, u2) = perp_grad(&psi).unwrap();
        let u = [u1.clone(), u2.clone(), SpectralField::zeros(g, Parity::Odd)];
        let rho = SpectralField::zeros(g, Parity::Even);
        let s = qg_initial_data(&rho, &u, 0.0).unwrap();
        let curl = curl_h(&vertical_average(&u1), &vertical_average(&u2)).unwrap();
        assert!(s.pi.max_diff(&curl) < 1e-13);
    }

    #[test]
    fn pressure_of_shear_is_zero() {
        let g = make_grid(16, 16, 1, 2.0 * PI).unwrap();
        let p = euler_pressure(&Vorticity2D::new(field(g, |x, _| x.cos())).unwrap()).unwrap();
        assert!(p.max_abs_coeff() < 1e-14);
    }
}
