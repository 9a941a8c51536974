use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EIG_MAX_ITER: usize = 200;

/// Below this horizontal wavenumber the closed-form eigenvectors are not used.
pub const CLOSED_FORM_XI_TOL: f64 = 1e-8;
/// Below this gap `lambda_1 - lambda_3` the closed-form eigenvectors are not used.
pub const CLOSED_FORM_GAP_TOL: f64 = 1e-10;

/// The 4x4 Hermitian symbol `A(xi, k, omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub xi: [f64; 2],
    pub k: f64,
    pub omega: f64,
    pub entries: [[Complex64; 4]; 4],
}

pub fn assemble_mode_matrix(xi: [f64; 2], k: f64, omega: f64) -> ModeMatrix {
    let r = |v: f64| Complex64::new(v, 0.0);
    let i_omega = Complex64::new(0.0, omega);
    let entries = [
        [ZERO, r(xi[0]), r(xi[1]), r(k)],
        [r(xi[0]), ZERO, i_omega, ZERO],
        [r(xi[1]), -i_omega, ZERO, ZERO],
        [r(k), ZERO, ZERO, ZERO],
    ];
    ModeMatrix { xi, k, omega, entries }
}

impl ModeMatrix {
    pub fn is_hermitian(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.entries[i][j] == self.entries[j][i].conj()))
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    pub fn apply(&self, x: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                *o += self.entries[i][j] * xj;
            }
        }
        out
    }

    fn to_nalgebra(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|i, j| self.entries[i][j])
    }
}

/// Closed-form eigenvalues `(lambda_1, lambda_2, lambda_3, lambda_4)` of
/// `A(xi, k, omega)` as functions of `|xi|^2`.
///
/// `lambda_3` is evaluated in the rationalised form
/// `sqrt(2) omega |k| / sqrt(S + sqrt(D))`, algebraically identical to
/// `sqrt((S - sqrt(D)) / 2)` but free of cancellation.
pub fn eigenvalues_closed(xi2: f64, k: f64, omega: f64) -> [f64; 4] {
    let s = omega * omega + xi2 + k * k;
    let disc = (s * s - 4.0 * omega * omega * k * k).max(0.0);
    let root = disc.sqrt();
    let l1 = (0.5 * (s + root)).sqrt();
    let l3 = if s + root > 0.0 {
        std::f64::consts::SQRT_2 * omega * k.abs() / (s + root).sqrt()
    } else {
        0.0
    };
    [l1, -l1, l3, -l3]
}

fn numeric_eigen(a: &ModeMatrix) -> Result<SymmetricEigen<Complex64, nalgebra::U4>> {
    SymmetricEigen::try_new(a.to_nalgebra(), 1e-15, EIG_MAX_ITER).ok_or(Error::NonConvergence(EIG_MAX_ITER))
}

/// Eigenvalues by a generic Hermitian eigensolver, sorted descending.
pub fn eigenvalues_oracle(a: &ModeMatrix) -> Result<[f64; 4]> {
    let eig = numeric_eigen(a)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok([vals[0], vals[1], vals[2], vals[3]])
}

/// The Fourier coefficients `(s, V_1, V_2, V_3)` at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub s_hat: Complex64,
    pub v_hat: [Complex64; 3],
}

impl ModeState {
    pub fn from_array(x: [Complex64; 4]) -> Self {
        ModeState { s_hat: x[0], v_hat: [x[1], x[2], x[3]] }
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.s_hat, self.v_hat[0], self.v_hat[1], self.v_hat[2]]
    }

    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigenvalues in the order `(lambda_1, lambda_2, lambda_3, lambda_4)` with
/// `lambda_1 >= lambda_3 >= 0 >= lambda_4 >= lambda_2`, and matching
/// orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambdas: [f64; 4],
    pub vectors: [[Complex64; 4]; 4],
    /// Set when the generic solver was used.
    pub degenerate: bool,
}

impl EigenSystem {
    /// `max_j |A E_j - lambda_j E_j|`.
    pub fn residual(&self, a: &ModeMatrix) -> f64 {
        (0..4)
            .map(|j| {
                let ae = a.apply(&self.vectors[j]);
                ae.iter()
                    .zip(&self.vectors[j])
                    .map(|(x, e)| (x - e * self.lambdas[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |<E_i, E_j> - delta_ij|`.
    pub fn identity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let g: Complex64 = self.vectors[i].iter().zip(&self.vectors[j]).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g - target).norm());
            }
        }
        err
    }
}

/// Rotates `v` so its first non-negligible component is real and positive.
fn fix_phase(v: &mut [Complex64; 4]) {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(c) = v.iter().find(|c| c.norm() > 1e-12 * scale).copied() {
        let rot = c.conj() / c.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// Normalised eigenvector for a non-zero eigenvalue `lambda`.
fn nonzero_branch(xi: [f64; 2], k: f64, omega: f64, lambda: f64) -> [Complex64; 4] {
    let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
    let l2 = lambda * lambda;
    let d = l2 - k * k;
    let mu = ((l2 * l2 + k * k * l2) / (d * d) * xi2 * xi2 + (l2 + omega * omega) * xi2).powf(-0.5);
    let mut v = [
        Complex64::new(mu * l2 * xi2 / d, 0.0),
        Complex64::new(mu * lambda * xi[0], mu * omega * xi[1]),
        Complex64::new(mu * lambda * xi[1], -mu * omega * xi[0]),
        Complex64::new(mu * k * lambda * xi2 / d, 0.0),
    ];
    fix_phase(&mut v);
    v
}

/// Closed-form orthonormal eigenbasis.
///
/// Fails with [`Error::DegenerateMode`] for `|xi| < 1e-8` or
/// `lambda_1 - lambda_3 < 1e-10`; callers then use [`eigenbasis_numeric`].
pub fn eigenbasis_closed(xi: [f64; 2], k: f64, omega: f64) -> Result<EigenSystem> {
    let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
    let lambdas = eigenvalues_closed(xi2, k, omega);
    if xi2.sqrt() < CLOSED_FORM_XI_TOL || lambdas[0] - lambdas[2] < CLOSED_FORM_GAP_TOL {
        return Err(Error::DegenerateMode(format!(
            "|xi| = {:.3e}, gap = {:.3e}",
            xi2.sqrt(),
            lambdas[0] - lambdas[2]
        )));
    }
    let v1 = nonzero_branch(xi, k, omega, lambdas[0]);
    let v2 = nonzero_branch(xi, k, omega, lambdas[1]);
    let (v3, v4) = if k == 0.0 {
        // double zero eigenvalue: geostrophic mode and the vertical velocity
        let mu = (xi2 + omega * omega).powf(-0.5);
        let mut e = [
            Complex64::new(0.0, -omega * mu),
            Complex64::new(-xi[1] * mu, 0.0),
            Complex64::new(xi[0] * mu, 0.0),
            ZERO,
        ];
        fix_phase(&mut e);
        (e, [ZERO, ZERO, ZERO, Complex64::new(1.0, 0.0)])
    } else {
        (nonzero_branch(xi, k, omega, lambdas[2]), nonzero_branch(xi, k, omega, lambdas[3]))
    };
    Ok(EigenSystem { lambdas, vectors: [v1, v2, v3, v4], degenerate: false })
}

/// Orthonormal eigenbasis from the generic Hermitian solver.
pub fn eigenbasis_numeric(a: &ModeMatrix) -> Result<EigenSystem> {
    let eig = numeric_eigen(a)?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    // descending d0 >= d1 >= d2 >= d3 maps to (lambda_1, lambda_2, lambda_3, lambda_4) = (d0, d3, d1, d2)
    let slots = [order[0], order[3], order[1], order[2]];
    let mut lambdas = [0.0; 4];
    let mut vectors = [[ZERO; 4]; 4];
    for (j, &c) in slots.iter().enumerate() {
        lambdas[j] = eig.eigenvalues[c];
        let mut v = [ZERO; 4];
        for (i, x) in v.iter_mut().enumerate() {
            *x = eig.eigenvectors[(i, c)];
        }
        fix_phase(&mut v);
        vectors[j] = v;
    }
    Ok(EigenSystem { lambdas, vectors, degenerate: true })
}

/// Closed form where valid, generic solver otherwise.
pub fn eigenbasis(xi: [f64; 2], k: f64, omega: f64) -> Result<EigenSystem> {
    match eigenbasis_closed(xi, k, omega) {
        Ok(e) => Ok(e),
        Err(Error::DegenerateMode(_)) => eigenbasis_numeric(&assemble_mode_matrix(xi, k, omega)),
        Err(e) => Err(e),
    }
}

/// Exact solution `X(t) = sum_j exp(-i lambda_j t) <E_j, X(0)> E_j` of
/// `X' + i A X = 0`.
pub fn propagate_mode(state: &ModeState, t: f64, eig: &EigenSystem) -> ModeState {
    let x = state.as_array();
    let mut out = [ZERO; 4];
    for j in 0..4 {
        let e = &eig.vectors[j];
        let c: Complex64 = e.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
        let phase = Complex64::from_polar(1.0, -eig.lambdas[j] * t);
        let w = c * phase;
        for (o, ei) in out.iter_mut().zip(e) {
            *o += w * ei;
        }
    }
    ModeState::from_array(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matrix_pattern_and_hermitian() {
        let a = assemble_mode_matrix([0.3, -1.2], 2.0 * PI, 0.4);
        assert!(a.is_hermitian());
        assert_eq!(a.trace(), ZERO);
        assert_eq!(a.entries[1][2], Complex64::new(0.0, 0.4));
        assert_eq!(a.entries[2][1], Complex64::new(0.0, -0.4));
        assert_eq!(a.entries[0][3], Complex64::new(2.0 * PI, 0.0));
    }

    #[test]
    fn pure_acoustic_symbol() {
        let l = eigenvalues_closed(1.0, 0.0, 0.0);
        assert_eq!(l, [1.0, -1.0, 0.0, -0.0]);
        let o = eigenvalues_oracle(&assemble_mode_matrix([1.0, 0.0], 0.0, 0.0)).unwrap();
        for (a, b) in o.iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_xi_block_matrix() {
        // A(0, pi, 0.5) decouples into blocks with eigenvalues +-pi and +-0.5
        let l = eigenvalues_closed(0.0, PI, 0.5);
        assert!((l[0] - PI).abs() < 1e-14 && (l[2] - 0.5).abs() < 1e-14);
        let o = eigenvalues_oracle(&assemble_mode_matrix([0.0, 0.0], PI, 0.5)).unwrap();
        for (a, b) in o.iter().zip([PI, 0.5, -0.5, -PI]) {
            assert!((a - b).abs() < 1e-13);
        }
        let e = eigenbasis([0.0, 0.0], PI, 0.5).unwrap();
        assert!(e.degenerate);
        assert!(e.residual(&assemble_mode_matrix([0.0, 0.0], PI, 0.5)) < 1e-12);
    }

    #[test]
    fn golden_ratio_example() {
        let l = eigenvalues_closed(1.0, 1.0, 1.0);
        assert!((l[0] - ((3.0 + 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
        assert!((l[0] - 1.618_033_988_749_895).abs() < 1e-12);
        assert!((l[2] - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((l[0] * l[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_horizontal_wavenumber_limits() {
        for (k, w) in [(PI, 0.3), (0.2, 0.9), (2.0, 2.0)] {
            let l = eigenvalues_closed(0.0, k, w);
            assert!((l[0] - k.max(w)).abs() < 1e-14);
            assert!((l[2] - k.min(w)).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_on_diagonal_and_zero() {
        let mut a = assemble_mode_matrix([0.0, 0.0], 0.0, 0.0);
        assert_eq!(eigenvalues_oracle(&a).unwrap(), [0.0; 4]);
        for (i, d) in [0.5, -2.0, 3.0, 1.0].iter().enumerate() {
            a.entries[i][i] = Complex64::new(*d, 0.0);
        }
        let o = eigenvalues_oracle(&a).unwrap();
        assert_eq!(o, [3.0, 1.0, 0.5, -2.0]);
    }

    #[test]
    fn closed_matches_oracle_cross_validation() {
        let a = assemble_mode_matrix([1.0, 1.0], 2.0 * PI, 0.3);
        let c = eigenvalues_closed(2.0, 2.0 * PI, 0.3);
        let o = eigenvalues_oracle(&a).unwrap();
        let sorted = [c[0], c[2], c[3], c[1]];
        for (x, y) in sorted.iter().zip(o) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_eigenvector_example() {
        let e = eigenbasis_closed([1.0, 0.0], 0.0, 0.5).unwrap();
        // E = 1.25^{-1/2} [-0.5 i, 0, 1, 0], up to the global phase fixed here
        let mu = 1.25f64.powf(-0.5);
        let expected = [Complex64::new(0.0, -0.5 * mu), ZERO, Complex64::new(mu, 0.0), ZERO];
        let c: Complex64 = expected.iter().zip(&e.vectors[2]).map(|(a, b)| a.conj() * b).sum();
        assert!((c.norm() - 1.0).abs() < 1e-14);
        assert_eq!(e.lambdas[2], 0.0);
        assert!(e.vectors[2][0].im.abs() < 1e-15 && e.vectors[2][0].re > 0.0);
    }

    #[test]
    fn closed_basis_orthonormal_and_consistent() {
        for &(xi, k, w) in &[([1.0, 1.0], PI, 0.7), ([0.3, -2.0], 3.0 * PI, 0.05), ([2.0, 0.5], 0.0, 0.9)] {
            let a = assemble_mode_matrix(xi, k, w);
            let e = eigenbasis_closed(xi, k, w).unwrap();
            assert!(e.residual(&a) < 1e-10);
            assert!(e.identity_error() < 1e-10);
        }
    }

    #[test]
    fn relation_for_lambda1_branch() {
        let (xi, k, w) = ([1.0, 1.0], PI, 0.7);
        let e = eigenbasis_closed(xi, k, w).unwrap();
        let v = e.vectors[0];
        let lhs = v[1] * xi[0] + v[2] * xi[1] + v[3] * k;
        assert!((lhs - v[0] * e.lambdas[0]).norm() < 1e-12);
        assert!((v[0] * k - v[3] * e.lambdas[0]).norm() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_signalled() {
        assert!(matches!(eigenbasis_closed([0.0, 0.0], PI, 0.5), Err(Error::DegenerateMode(_))));
        assert!(matches!(eigenbasis_closed([1e-9, 0.0], PI, PI), Err(Error::DegenerateMode(_))));
    }

    #[test]
    fn numeric_basis_identity_matrix() {
        let mut a = assemble_mode_matrix([0.0, 0.0], 0.0, 0.0);
        for i in 0..4 {
            a.entries[i][i] = Complex64::new(1.0, 0.0);
        }
        let e = eigenbasis_numeric(&a).unwrap();
        assert!(e.identity_error() < 1e-14);
        assert!(e.residual(&a) < 1e-14);
    }

    #[test]
    fn propagation_identity_kernel_and_unitarity() {
        let xi = [0.8, -0.4];
        let e = eigenbasis_closed(xi, 0.0, 0.6).unwrap();
        let x = ModeState::from_array([
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.1, 0.5),
            Complex64::new(0.7, 0.9),
            Complex64::new(0.0, 0.0),
        ]);
        let same = propagate_mode(&x, 0.0, &e);
        assert!(same.as_array().iter().zip(x.as_array()).all(|(a, b)| (a - b).norm() < 1e-14));
        let kernel = ModeState::from_array(e.vectors[2]);
        let later = propagate_mode(&kernel, 123.4, &e);
        assert!(later.as_array().iter().zip(kernel.as_array()).all(|(a, b)| (a - b).norm() < 1e-13));
        let e = eigenbasis_closed(xi, 2.0 * PI, 0.6).unwrap();
        let moved = propagate_mode(&x, 7.3, &e);
        assert!((moved.norm() - x.norm()).abs() / x.norm() < 1e-13);
    }

    #[test]
    fn propagation_solves_the_ode() {
        // compare with a fine RK4 integration of X' = -i A X
        let (xi, k, w) = ([0.5, 1.5], PI, 0.4);
        let a = assemble_mode_matrix(xi, k, w);
        let e = eigenbasis_closed(xi, k, w).unwrap();
        let x0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5), Complex64::new(-0.2, 0.0), Complex64::new(0.1, 0.1)];
        let rhs = |x: &[Complex64; 4]| a.apply(x).map(|c| c * Complex64::new(0.0, -1.0));
        let mut x = x0;
        let dt = 1e-3;
        for _ in 0..2000 {
            let k1 = rhs(&x);
            let x2: [Complex64; 4] = std::array::from_fn(|i| x[i] + k1[i] * (dt / 2.0));
            let k2 = rhs(&x2);
            let x3: [Complex64; 4] = std::array::from_fn(|i| x[i] + k2[i] * (dt / 2.0));
            let k3 = rhs(&x3);
            let x4: [Complex64; 4] = std::array::from_fn(|i| x[i] + k3[i] * dt);
            let k4 = rhs(&x4);
            x = std::array::from_fn(|i| x[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0));
        }
        let exact = propagate_mode(&ModeState::from_array(x0), 2.0, &e).as_array();
        assert!(exact.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-10));
    }
}
