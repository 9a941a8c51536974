use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::kernel::{Branch, CutoffProfile};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::spectral::{transform_inverse_complex, Grid, SpectralField};

/// One row of a decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRecord {
    pub t: f64,
    pub p: f64,
    pub k: f64,
    pub omega: f64,
    pub beta: f64,
    pub norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayConfig {
    pub profile: CutoffProfile,
    pub k: f64,
    pub omega: f64,
    pub branch: Branch,
    pub beta: f64,
    /// Lebesgue exponent, `f64::INFINITY` for the sup norm.
    pub p: f64,
    /// Increasing, positive.
    pub times: Vec<f64>,
    /// `C` is the sup of `norm / shape` over `t <= fit_factor * times[0]`.
    pub fit_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySweep {
    pub records: Vec<DecayRecord>,
    pub c_fit: f64,
    /// `||h||_{L^{p'}}` of the truncated data.
    pub data_norm: f64,
    pub warnings: Vec<String>,
}

impl DecaySweep {
    /// Largest `norm / bound` after the fitting window.
    pub fn worst_ratio_after_fit(&self, fit_end: f64) -> f64 {
        self.records.iter().filter(|r| r.t > fit_end).map(|r| r.ratio).fold(0.0, f64::max)
    }
}

/// `L^p` norm of complex samples on a horizontal grid.
pub fn lp_norm(grid: &Grid, values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    }
    let terms: Vec<f64> = values.iter().map(|c| c.norm().powf(p)).collect();
    (pairwise_sum(&terms) * grid.cell_area()).powf(1.0 / p)
}

/// Hoelder conjugate `p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `max{1 / (omega t^{1 - beta/2}), t^{-beta/2}}^{1 - 2/p}`.
pub fn decay_shape(t: f64, omega: f64, beta: f64, p: f64) -> f64 {
    let near = 1.0 / (omega * t.powf(1.0 - 0.5 * beta));
    let far = t.powf(-0.5 * beta);
    let e = if p.is_infinite() { 1.0 } else { 1.0 - 2.0 / p };
    near.max(far).powf(e)
}

/// Applies the cut-off `psi(|xi|)` to a horizontal spectrum and drops the
/// Nyquist rows.
pub fn frequency_truncate(h: &SpectralField, psi: &CutoffProfile) -> SpectralField {
    let g = h.grid;
    h.without_nyquist().map_modes(|i1, i2, _, c| {
        let (a, b) = (g.xi1(i1), g.xi2(i2));
        c * psi.value(a * a + b * b)
    })
}

/// Evolves `psi`-truncated data `h` by the scalar multiplier
/// `exp(-i lambda_j(|xi|^2, k, omega) t)` on the periodic plane, records the
/// `L^p` norm at each time, and compares it with
/// `C max{1/(omega t^{1-beta/2}), t^{-beta/2}}^{1-2/p} ||h||_{L^{p'}}`.
pub fn decay_sweep(h: &SpectralField, cfg: &DecayConfig) -> Result<DecaySweep> {
    let g = h.grid;
    if !g.is_horizontal() {
        return Err(Error::ShapeMismatch("decay sweep expects horizontal data".into()));
    }
    if !(cfg.p >= 2.0) {
        return Err(Error::InvalidArgument(format!("p must be >= 2, got {}", cfg.p)));
    }
    if cfg.p > 2.0 && !(cfg.omega > 0.0) {
        return Err(Error::InvalidArgument("the decay bound needs omega > 0".into()));
    }
    if cfg.times.is_empty() || cfg.times[0] <= 0.0 || cfg.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be positive and increasing".into()));
    }
    if !(cfg.beta > 0.0) || !(cfg.fit_factor >= 1.0) {
        return Err(Error::InvalidArgument("need beta > 0 and fit_factor >= 1".into()));
    }
    let mut warnings = Vec::new();
    let nyquist = g.dxi() * (g.nx.min(g.ny) / 2) as f64;
    if cfg.profile.b.sqrt() >= 2.0 / 3.0 * nyquist {
        warnings.push(format!(
            "cut-off radius {:.3} reaches the dealiasing radius {:.3}",
            cfg.profile.b.sqrt(),
            2.0 / 3.0 * nyquist
        ));
    }
    let h_psi = frequency_truncate(h, &cfg.profile);
    let data_norm = lp_norm(&g, &transform_inverse_complex(&h_psi), conjugate_exponent(cfg.p));
    if !(data_norm > 0.0) {
        return Err(Error::InvalidArgument("truncated data vanish".into()));
    }
    let lambdas: Vec<f64> = (0..g.len())
        .map(|i| {
            let (a, b) = (g.xi1(i % g.nx), g.xi2(i / g.nx));
            cfg.branch.lambda(a * a + b * b, cfg.k, cfg.omega)
        })
        .collect();
    let norms: Vec<f64> = cfg
        .times
        .par_iter()
        .map(|&t| {
            let mut z = h_psi.clone();
            for (c, l) in z.coeffs.iter_mut().zip(&lambdas) {
                *c *= Complex64::from_polar(1.0, -l * t);
            }
            lp_norm(&g, &transform_inverse_complex(&z), cfg.p)
        })
        .collect();
    let fit_end = cfg.fit_factor * cfg.times[0];
    let shapes: Vec<f64> = cfg.times.iter().map(|&t| decay_shape(t, cfg.omega, cfg.beta, cfg.p)).collect();
    let c_fit = cfg
        .times
        .iter()
        .zip(norms.iter().zip(&shapes))
        .filter(|(t, _)| **t <= fit_end * (1.0 + 1e-12))
        .map(|(_, (n, s))| n / (s * data_norm))
        .fold(0.0, f64::max);
    let records = cfg
        .times
        .iter()
        .zip(norms.iter().zip(&shapes))
        .map(|(&t, (&norm, &s))| {
            let bound = c_fit * s * data_norm;
            DecayRecord { t, p: cfg.p, k: cfg.k, omega: cfg.omega, beta: cfg.beta, norm, bound, ratio: norm / bound }
        })
        .collect();
    Ok(DecaySweep { records, c_fit, data_norm, warnings })
}

/// Geometric time grid with `per_decade` points per decade from `t0` to `t1`.
pub fn log_times(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    let n = ((t1 / t0).log10() * per_decade as f64).round() as usize;
    (0..=n).map(|i| t0 * 10f64.powf(i as f64 / per_decade as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, transform_forward, Parity, ParityField};
    use std::f64::consts::PI;

    fn gaussian(g: Grid) -> SpectralField {
        let c = 0.5 * g.length;
        transform_forward(&ParityField::from_fn(g, Parity::Even, |x, y, _| {
            (-((x - c).powi(2) + (y - c).powi(2)) / 2.0).exp()
        }))
    }

    fn config(p: f64, omega: f64) -> DecayConfig {
        DecayConfig {
            profile: CutoffProfile::new(1.0, 4.0).unwrap(),
            k: PI,
            omega,
            branch: Branch::One,
            beta: 0.5,
            p,
            times: log_times(0.5, 50.0, 5),
            fit_factor: 10.0,
        }
    }

    #[test]
    fn l2_norm_is_conserved() {
        let g = make_grid(64, 64, 1, 16.0 * PI).unwrap();
        let s = decay_sweep(&gaussian(g), &config(2.0, 0.5)).unwrap();
        let n0 = s.records[0].norm;
        assert!(s.records.iter().all(|r| (r.norm - n0).abs() < 1e-12 * n0));
    }

    #[test]
    fn sup_norm_decays() {
        let g = make_grid(128, 128, 1, 32.0 * PI).unwrap();
        let s = decay_sweep(&gaussian(g), &config(f64::INFINITY, 0.5)).unwrap();
        assert!(s.warnings.is_empty());
        let first = s.records[0].norm;
        let last = s.records.last().unwrap().norm;
        assert!(last < 0.2 * first, "{first} -> {last}");
        assert!(s.worst_ratio_after_fit(5.0) <= 1.0);
    }

    #[test]
    fn shape_scales_with_omega() {
        let a = decay_shape(2.0, 0.02, 1.0 / 3.0, f64::INFINITY);
        let b = decay_shape(2.0, 0.01, 1.0 / 3.0, f64::INFINITY);
        assert!((b / a - 2.0).abs() < 1e-14);
        assert_eq!(decay_shape(7.0, 0.3, 0.5, 2.0), 1.0);
    }

    #[test]
    fn validates_inputs() {
        let g = make_grid(16, 16, 1, 8.0 * PI).unwrap();
        let mut c = config(1.5, 0.5);
        assert!(decay_sweep(&gaussian(g), &c).is_err());
        c.p = 4.0;
        c.times = vec![2.0, 1.0];
        assert!(decay_sweep(&gaussian(g), &c).is_err());
    }

    #[test]
    fn log_time_grid() {
        let t = log_times(1.0, 100.0, 4);
        assert_eq!(t.len(), 9);
        assert!((t[8] - 100.0).abs() < 1e-12);
    }
}
