use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{j0, j1};
use super::quadrature::{integrate, Quadrature};
use crate::error::{Error, Result};
use crate::numerics::{plateau, plateau_derivative};
use crate::wave::eigenvalues_closed;

/// Relative tolerance used for every oscillatory integral.
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Frequency cut-off `psi(sqrt z)` in the variable `z = |xi|^2`: a smooth
/// plateau supported in `[a, b]` and equal to one on the middle half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub a: f64,
    pub b: f64,
}

impl CutoffProfile {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("cut-off needs 0 < a < b, got [{a}, {b}]")));
        }
        Ok(CutoffProfile { a, b })
    }

    /// `psi(sqrt z)`.
    pub fn value(&self, z: f64) -> f64 {
        plateau(z, self.a, self.b)
    }

    pub fn derivative(&self, z: f64) -> f64 {
        plateau_derivative(z, self.a, self.b)
    }

    /// `psi(|xi|)` for a horizontal wavenumber magnitude.
    pub fn of_wavenumber(&self, rho: f64) -> f64 {
        self.value(rho * rho)
    }
}

/// One of the four eigenvalue branches `lambda_1 .. lambda_4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    One,
    Two,
    Three,
    Four,
}

impl Branch {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            3 => Ok(Branch::Three),
            4 => Ok(Branch::Four),
            _ => Err(Error::InvalidArgument(format!("branch must be 1..=4, got {j}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Branch::One => 1,
            Branch::Two => 2,
            Branch::Three => 3,
            Branch::Four => 4,
        }
    }

    pub fn lambda(self, z: f64, k: f64, omega: f64) -> f64 {
        eigenvalues_closed(z, k, omega)[self.index() as usize - 1]
    }

    fn is_slow(self) -> bool {
        matches!(self, Branch::Three | Branch::Four)
    }

    fn sign(self) -> f64 {
        match self {
            Branch::One | Branch::Three => 1.0,
            Branch::Two | Branch::Four => -1.0,
        }
    }
}

/// `d lambda / dz` with `z = |xi|^2`, in cancellation-free form.
///
/// With `S = omega^2 + z + k^2` and `D = S^2 - 4 omega^2 k^2`,
/// `d lambda_1/dz = (1 + S/sqrt D) / (4 lambda_1)` and
/// `d lambda_3/dz = -omega |k| / (sqrt 2 sqrt D sqrt(S + sqrt D))`.
pub fn phase_derivative(z: f64, k: f64, omega: f64, branch: Branch) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::InvalidArgument(format!("phase derivative needs z > 0, got {z}")));
    }
    if branch.is_slow() && k == 0.0 {
        return Err(Error::InvalidArgument("branches 3 and 4 vanish identically for k = 0".into()));
    }
    let s = omega * omega + z + k * k;
    let root = (s * s - 4.0 * omega * omega * k * k).max(0.0).sqrt();
    let d = if branch.is_slow() {
        -omega * k.abs() / (std::f64::consts::SQRT_2 * root * (s + root).sqrt())
    } else {
        let l1 = (0.5 * (s + root)).sqrt();
        (1.0 + s / root) / (4.0 * l1)
    };
    Ok(branch.sign() * d)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Panels needed so that neither the phase nor the Bessel factor turns by
/// more than about one period per panel.
fn oscillation_panels(psi: &CutoffProfile, t: f64, r_h: f64, k: f64, omega: f64, branch: Branch) -> usize {
    let dl = (branch.lambda(psi.b, k, omega) - branch.lambda(psi.a, k, omega)).abs();
    let phase_turns = t * dl / (2.0 * PI);
    let bessel_turns = r_h * (psi.b.sqrt() - psi.a.sqrt()) / (2.0 * PI);
    4 + (phase_turns + bessel_turns).ceil() as usize * 2
}

/// The radial oscillatory integral
/// `I = (1/4pi) int_a^b exp(-i lambda_j(z, k, omega) t) psi(sqrt z) J_0(sqrt z r_h) dz`,
/// which equals the planar inverse transform `(2pi)^{-2} int e^{i xi.x}
/// e^{-i lambda_j t} psi(|xi|) d xi` at `|x_h| = r_h`.
pub fn oscillatory_kernel_detailed(
    t: f64,
    r_h: f64,
    k: f64,
    omega: f64,
    branch: Branch,
    psi: &CutoffProfile,
) -> Result<Quadrature> {
    check_time(t)?;
    if !(r_h >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be >= 0, got {r_h}")));
    }
    let panels = oscillation_panels(psi, t, r_h, k, omega, branch);
    let f = |z: f64| {
        let amp = psi.value(z) * j0(z.sqrt() * r_h);
        Complex64::from_polar(amp, -branch.lambda(z, k, omega) * t)
    };
    let q = integrate(f, psi.a, psi.b, KERNEL_REL_TOL, 1e-300, panels)?;
    let s = 1.0 / (4.0 * PI);
    Ok(Quadrature { value: q.value * s, error: q.error * s, l1: q.l1 * s, panels: q.panels })
}

pub fn oscillatory_kernel(t: f64, r_h: f64, k: f64, omega: f64, branch: Branch, psi: &CutoffProfile) -> Result<Complex64> {
    Ok(oscillatory_kernel_detailed(t, r_h, k, omega, branch, psi)?.value)
}

/// Ingredients of the van Corput estimate for one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanCorput {
    /// `min_{[a,b]} |d lambda / dz|`, attained at an endpoint.
    pub lambda0: f64,
    /// `|Phi(b)| + int_a^b |Phi'| dz` with `Phi(z) = psi(sqrt z) J_0(sqrt z r_h)`.
    pub variation: f64,
    /// `variation / (t lambda0)`, carrying the same `1/4pi` factor as the kernel.
    pub bound: f64,
}

/// The van Corput right-hand side for [`oscillatory_kernel`] without its
/// absolute constant.
pub fn van_corput_bound(psi: &CutoffProfile, k: f64, omega: f64, t: f64, r_h: f64, branch: Branch) -> Result<VanCorput> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("van Corput bound needs t > 0, got {t}")));
    }
    let da = phase_derivative(psi.a, k, omega, branch)?;
    let db = phase_derivative(psi.b, k, omega, branch)?;
    let lambda0 = da.abs().min(db.abs());
    if !(lambda0 > 0.0) {
        return Err(Error::DegenerateMode(format!("phase derivative vanishes: lambda0 = {lambda0}")));
    }
    let dphi = |z: f64| {
        let sz = z.sqrt();
        (psi.derivative(z) * j0(sz * r_h) - psi.value(z) * j1(sz * r_h) * r_h / (2.0 * sz)).abs()
    };
    let panels = 8 + 2 * (r_h * (psi.b.sqrt() - psi.a.sqrt()) / (2.0 * PI)).ceil() as usize;
    let total = integrate(|z| Complex64::new(dphi(z), 0.0), psi.a, psi.b, 1e-10, 1e-300, panels)?.value.re;
    let end = (psi.value(psi.b) * j0(psi.b.sqrt() * r_h)).abs();
    let variation = end + total;
    Ok(VanCorput { lambda0, variation, bound: variation / (4.0 * PI * t * lambda0) })
}

/// `|I| t lambda0 / (|Phi(b)| + int |Phi'|)`: the empirical van Corput
/// constant for an oscillatory integral of magnitude `integral_abs`.
pub fn van_corput_ratio(integral_abs: f64, t: f64, lambda0: f64, variation: f64) -> f64 {
    integral_abs * t * lambda0 / variation
}

/// Far-field bound `c(psi) t^{-beta/2}` valid for `|x_h| >= t^beta`, from
/// `|J_0(x)| <= sqrt(2 / (pi x))`:
/// `c(psi) = (1/4pi) sqrt(2/pi) int psi(sqrt z) z^{-1/4} dz`.
pub fn far_field_bound(t: f64, beta: f64, psi: &CutoffProfile) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("far-field bound needs t > 0, got {t}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    Ok(far_field_constant(psi)? * t.powf(-0.5 * beta))
}

pub fn far_field_constant(psi: &CutoffProfile) -> Result<f64> {
    let q = integrate(|z| Complex64::new(psi.value(z) * z.powf(-0.25), 0.0), psi.a, psi.b, 1e-12, 0.0, 8)?;
    Ok((2.0 / PI).sqrt() * q.value.re / (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi() -> CutoffProfile {
        CutoffProfile::new(1.0, 4.0).unwrap()
    }

    #[test]
    fn profile_shape() {
        let p = psi();
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.value(4.0), 0.0);
        assert_eq!(p.value(2.5), 1.0);
        assert!(CutoffProfile::new(2.0, 1.0).is_err());
        let mut z = 0.5;
        while z < 4.5 {
            let v = p.value(z);
            assert!((0.0..=1.0).contains(&v));
            z += 0.01;
        }
    }

    #[test]
    fn kernel_at_origin_and_rest() {
        let p = psi();
        let i = oscillatory_kernel(0.0, 0.0, PI, 0.5, Branch::One, &p).unwrap();
        // trapezoid oracle for (1/4pi) int psi
        let n = 20000;
        let h = 3.0 / n as f64;
        let oracle: f64 = (0..=n).map(|i| p.value(1.0 + i as f64 * h)).sum::<f64>() * h / (4.0 * PI);
        assert!(i.im.abs() < 1e-15 && i.re > 0.0);
        assert!((i.re - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn kernel_matches_planar_inverse_transform() {
        // (2pi)^{-2} int int psi(|xi|) cos(xi_1 r) d xi by a tensor trapezoid rule
        let p = psi();
        let r = 3.0;
        let n = 801;
        let h = 4.0 / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x1 = -2.0 + i as f64 * h;
            for j in 0..n {
                let x2 = -2.0 + j as f64 * h;
                acc += p.of_wavenumber((x1 * x1 + x2 * x2).sqrt()) * (x1 * r).cos();
            }
        }
        let oracle = acc * h * h / (4.0 * PI * PI);
        let got = oscillatory_kernel(0.0, r, 0.0, 0.0, Branch::One, &p).unwrap();
        assert!((got.re - oracle).abs() < 1e-6 * oracle.abs(), "{} vs {oracle}", got.re);
    }

    #[test]
    fn phase_derivative_matches_differences() {
        for branch in [Branch::One, Branch::Two, Branch::Three, Branch::Four] {
            for &(z, k, w) in &[(1.5, PI, 0.5), (3.0, 2.0 * PI, 0.03), (0.2, 0.7, 1.0)] {
                let h = 1e-6;
                let fd = (branch.lambda(z + h, k, w) - branch.lambda(z - h, k, w)) / (2.0 * h);
                let d = phase_derivative(z, k, w, branch).unwrap();
                assert!((d - fd).abs() < 1e-8, "{branch:?} {d} {fd}");
            }
        }
    }

    #[test]
    fn phase_derivative_acoustic_case() {
        let d = phase_derivative(2.25, 0.0, 0.0, Branch::One).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert!(phase_derivative(1.0, 0.0, 0.5, Branch::Three).is_err());
    }

    #[test]
    fn phase_derivative_monotone() {
        let (k, w) = (PI, 0.5);
        let mut prev1 = f64::INFINITY;
        let mut prev3 = f64::NEG_INFINITY;
        for i in 0..=60 {
            let z = 1.0 + 3.0 * i as f64 / 60.0;
            let d1 = phase_derivative(z, k, w, Branch::One).unwrap();
            let d3 = phase_derivative(z, k, w, Branch::Three).unwrap();
            assert!(d1 < prev1 && d3 > prev3 && d3 < 0.0);
            prev1 = d1;
            prev3 = d3;
        }
    }

    #[test]
    fn linear_phase_sanity() {
        // int_1^2 e^{i z t} dz = 2 sin(t/2) / t up to a phase, and the bound is 1/t
        for &t in &[0.5, 3.0, 10.0, 77.0] {
            let q = integrate(|z| Complex64::from_polar(1.0, z * t), 1.0, 2.0, 1e-12, 0.0, 8).unwrap();
            let exact = 2.0 * (0.5 * t).sin().abs() / t;
            assert!((q.value.norm() - exact).abs() < 1e-11);
            assert!(van_corput_ratio(q.value.norm(), t, 1.0, 1.0) <= 2.0);
        }
    }

    #[test]
    fn van_corput_holds_on_a_small_sweep() {
        let p = psi();
        for branch in [Branch::One, Branch::Three] {
            for &t in &[10.0, 100.0] {
                let vc = van_corput_bound(&p, PI, 0.3, t, 2.0, branch).unwrap();
                let i = oscillatory_kernel(t, 2.0, PI, 0.3, branch, &p).unwrap();
                assert!(i.norm() <= 2.0 * vc.bound, "{branch:?} t={t}");
            }
        }
    }

    #[test]
    fn far_field_power_law() {
        let p = psi();
        let b1 = far_field_bound(10.0, 1.0 / 3.0, &p).unwrap();
        let b2 = far_field_bound(20.0, 1.0 / 3.0, &p).unwrap();
        assert!((b2 / b1 - 2f64.powf(-1.0 / 6.0)).abs() < 1e-14);
    }

    #[test]
    fn far_field_bound_dominates_kernel() {
        let p = psi();
        let beta = 0.5;
        for &t in &[10.0, 100.0, 1000.0] {
            let r = 1.5 * f64::powf(t, beta);
            let i = oscillatory_kernel(t, r, PI, 0.5, Branch::One, &p).unwrap();
            assert!(i.norm() <= far_field_bound(t, beta, &p).unwrap());
        }
    }
}
