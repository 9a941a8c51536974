use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{Parity, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

/// Spectral derivative of the given order along `axis`.
///
/// Horizontally this multiplies by `(i xi_a)^order`; odd orders zero the
/// Nyquist row of that axis so the result stays real. Vertically each
/// derivative maps `cos(k pi z) -> -k pi sin(k pi z)` and
/// `sin(k pi z) -> k pi cos(k pi z)`, flipping the parity.
pub fn spectral_derivative(f: &SpectralField, axis: Axis, order: u32) -> Result<SpectralField> {
    if order == 0 {
        return Err(Error::InvalidArgument("derivative order must be >= 1".into()));
    }
    let g = f.grid;
    match axis {
        Axis::X1 | Axis::X2 => {
            let odd = order % 2 == 1;
            let ik_pow = |xi: f64| Complex64::new(0.0, xi).powu(order);
            Ok(f.map_modes(|i1, i2, _, c| {
                let (xi, nyq) = match axis {
                    Axis::X1 => (g.xi1(i1), g.is_nyquist_x(i1)),
                    _ => (g.xi2(i2), g.is_nyquist_y(i2)),
                };
                if odd && nyq {
                    ZERO
                } else {
                    c * ik_pow(xi)
                }
            }))
        }
        Axis::X3 => {
            let mut out = f.clone();
            for _ in 0..order {
                out = vertical_derivative_once(&out);
            }
            Ok(out)
        }
    }
}

fn vertical_derivative_once(f: &SpectralField) -> SpectralField {
    let sign = match f.parity {
        Parity::Even => -1.0,
        Parity::Odd => 1.0,
    };
    let mut out = f.map_modes(|_, _, k, c| c * (sign * k as f64 * PI));
    out.parity = f.parity.flipped();
    out
}

/// Horizontal Laplacian `-|xi|^2`.
pub fn laplacian_h(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    f.map_modes(|i1, i2, _, c| {
        let (a, b) = (g.xi1(i1), g.xi2(i2));
        c * -(a * a + b * b)
    })
}

/// `div_h (u1, u2) = d1 u1 + d2 u2`.
pub fn div_h(u1: &SpectralField, u2: &SpectralField) -> Result<SpectralField> {
    spectral_derivative(u1, Axis::X1, 1)?.add(&spectral_derivative(u2, Axis::X2, 1)?)
}

/// `curl_h (u1, u2) = d1 u2 - d2 u1`.
pub fn curl_h(u1: &SpectralField, u2: &SpectralField) -> Result<SpectralField> {
    spectral_derivative(u2, Axis::X1, 1)?.sub(&spectral_derivative(u1, Axis::X2, 1)?)
}

/// `grad_h^perp q = (-d2 q, d1 q)`.
pub fn perp_grad(q: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    Ok((
        spectral_derivative(q, Axis::X2, 1)?.scaled(-1.0),
        spectral_derivative(q, Axis::X1, 1)?,
    ))
}

/// Solves `-Delta_h q + omega^2 q = rhs` on a horizontal grid.
///
/// For `omega = 0` the mean of `q` is fixed to zero, and a non-zero mean in
/// `rhs` is rejected.
pub fn invert_helmholtz_h(rhs: &SpectralField, omega: f64) -> Result<SpectralField> {
    let g = rhs.grid;
    if !g.is_horizontal() {
        return Err(Error::ShapeMismatch("Helmholtz inversion expects a horizontal field".into()));
    }
    if !(omega >= 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be >= 0, got {omega}")));
    }
    let w2 = omega * omega;
    if w2 == 0.0 {
        let mean = rhs.get(0, 0, 0).norm();
        let scale = rhs.max_abs_coeff().max(1.0);
        if mean > 1e-12 * scale {
            return Err(Error::SingularInversion(format!(
                "omega = 0 requires a mean-free right-hand side, mean = {mean:.3e}"
            )));
        }
    }
    Ok(rhs.map_modes(|i1, i2, _, c| {
        let (a, b) = (g.xi1(i1), g.xi2(i2));
        let d = a * a + b * b + w2;
        if d == 0.0 {
            ZERO
        } else {
            c / d
        }
    }))
}

/// Leray projection of a horizontal vector field onto its solenoidal part,
/// applied plane by plane.
pub fn helmholtz_project_h(u1: &SpectralField, u2: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    u1.check_compatible(u2)?;
    let g = u1.grid;
    let mut p1 = u1.clone();
    let mut p2 = u2.clone();
    for k in 0..g.nz {
        for i2 in 0..g.ny {
            for i1 in 0..g.nx {
                let (a, b) = (g.xi1(i1), g.xi2(i2));
                let n2 = a * a + b * b;
                if n2 == 0.0 {
                    continue;
                }
                let i = g.idx(i1, i2, k);
                let dot = (u1.coeffs[i] * a + u2.coeffs[i] * b) / n2;
                p1.coeffs[i] = u1.coeffs[i] - dot * a;
                p2.coeffs[i] = u2.coeffs[i] - dot * b;
            }
        }
    }
    Ok((p1, p2))
}

/// `int_0^1 f dz` as a horizontal field.
pub fn vertical_average(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    let h = g.horizontal();
    let plane = g.plane_len();
    let mut out = SpectralField::zeros(h, Parity::Even);
    match f.parity {
        Parity::Even => out.coeffs.copy_from_slice(&f.coeffs[..plane]),
        Parity::Odd => {
            let top = g.top_mode();
            for k in (1..g.nz).step_by(2) {
                if k == top {
                    continue;
                }
                let w = 2.0 / (k as f64 * PI);
                for p in 0..plane {
                    out.coeffs[p] += f.coeffs[k * plane + p] * w;
                }
            }
        }
    }
    out
}

/// Places a horizontal field as the `kappa = 0` (z-independent) plane of an
/// even field on `grid`.
pub fn embed_constant_in_z(f: &SpectralField, grid: Grid) -> Result<SpectralField> {
    if f.grid != grid.horizontal() {
        return Err(Error::ShapeMismatch("horizontal field does not match grid".into()));
    }
    let mut out = SpectralField::zeros(grid, Parity::Even);
    out.coeffs[..grid.plane_len()].copy_from_slice(&f.coeffs);
    Ok(out)
}

/// Whether mode `(i1, i2, kappa)` survives the 2/3 rule.
#[inline]
pub(crate) fn keeps_mode(g: &Grid, i1: usize, i2: usize, k: usize) -> bool {
    let j1 = Grid::signed_index(i1, g.nx).unsigned_abs() as usize;
    let j2 = Grid::signed_index(i2, g.ny).unsigned_abs() as usize;
    let vertical_ok = g.nz == 1 || 3 * k < 2 * g.top_mode();
    3 * j1 < g.nx && 3 * j2 < g.ny && vertical_ok
}

/// 2/3-rule truncation in all three directions.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    f.map_modes(|i1, i2, k, c| if keeps_mode(&g, i1, i2, k) { c } else { ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, transform_forward, transform_inverse, ParityField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g2() -> Grid {
        make_grid(16, 16, 1, 2.0 * PI).unwrap()
    }

    fn random_smooth(grid: Grid, parity: Parity, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..6.3), rng.random_range(0.0..6.3), rng.random_range(-1.0..1.0)))
            .collect();
        let l = grid.length;
        let f = ParityField::from_fn(grid, parity, |x, y, z| {
            let mut v = 0.0;
            for (n, (a, p, q, b)) in amp.iter().enumerate() {
                let kx = (n % 3) as f64 * 2.0 * PI / l;
                let ky = (n % 2 + 1) as f64 * 2.0 * PI / l;
                let vert = match parity {
                    Parity::Even => (n as f64 * PI * z / 2.0).cos(),
                    Parity::Odd => ((n % 3 + 1) as f64 * PI * z).sin(),
                };
                v += (a * (kx * x + p).cos() + b * (ky * y + q).sin()) * vert;
            }
            v
        });
        transform_forward(&f)
    }

    #[test]
    fn horizontal_derivative_of_cosine() {
        let g = g2();
        let f = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, y, _| (2.0 * x + 3.0 * y).cos()));
        let d = transform_inverse(&spectral_derivative(&f, Axis::X1, 1).unwrap());
        let expect = ParityField::from_fn(g, Parity::Even, |x, y, _| -2.0 * (2.0 * x + 3.0 * y).sin());
        assert!(d.values.iter().zip(&expect.values).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn vertical_derivative_flips_parity() {
        let g = make_grid(8, 8, 9, 2.0 * PI).unwrap();
        let f = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, _, z| x.cos() * (2.0 * PI * z).cos()));
        let d1 = spectral_derivative(&f, Axis::X3, 1).unwrap();
        assert_eq!(d1.parity, Parity::Odd);
        let d2 = spectral_derivative(&f, Axis::X3, 2).unwrap();
        assert_eq!(d2.parity, Parity::Even);
        let p = transform_inverse(&d1);
        let expect = ParityField::from_fn(g, Parity::Odd, |x, _, z| -2.0 * PI * x.cos() * (2.0 * PI * z).sin());
        assert!(p.values.iter().zip(&expect.values).all(|(a, b)| (a - b).abs() < 1e-11));
        assert!(spectral_derivative(&f, Axis::X3, 0).is_err());
    }

    #[test]
    fn laplacian_of_single_mode() {
        let g = g2();
        let f = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, y, _| (x - 2.0 * y).sin()));
        let lap = laplacian_h(&f);
        assert!(lap.max_diff(&f.scaled(-5.0)) < 1e-13);
    }

    #[test]
    fn helmholtz_single_mode_and_constant() {
        let g = g2();
        let omega = 0.7;
        let rhs = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, _, _| (1.0 + omega * omega) * x.cos()));
        let q = transform_inverse(&invert_helmholtz_h(&rhs, omega).unwrap());
        assert!(q.values.iter().enumerate().all(|(i, v)| (v - g.x(i % g.nx).cos()).abs() < 1e-13));
        let c = transform_forward(&ParityField::from_fn(g, Parity::Even, |_, _, _| 2.0));
        let q = invert_helmholtz_h(&c, omega).unwrap();
        assert!((q.get(0, 0, 0).re - 2.0 / (omega * omega)).abs() < 1e-13);
    }

    #[test]
    fn helmholtz_residual_random() {
        let g = g2();
        let rhs = random_smooth(g, Parity::Even, 11);
        for omega in [0.3, 1.0] {
            let q = invert_helmholtz_h(&rhs, omega).unwrap();
            let resid = laplacian_h(&q).scaled(-1.0).axpy(omega * omega, &q).unwrap().sub(&rhs).unwrap();
            assert!(transform_inverse(&resid).max_abs() < 1e-10);
        }
    }

    #[test]
    fn helmholtz_zero_omega_requires_mean_free() {
        let g = g2();
        let rhs = transform_forward(&ParityField::from_fn(g, Parity::Even, |_, _, _| 1.0));
        assert!(matches!(invert_helmholtz_h(&rhs, 0.0), Err(Error::SingularInversion(_))));
        let rhs = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, _, _| x.sin()));
        let q = invert_helmholtz_h(&rhs, 0.0).unwrap();
        assert_eq!(q.get(0, 0, 0), ZERO);
    }

    #[test]
    fn projection_kills_gradients_keeps_rotational() {
        let g = g2();
        let phi = random_smooth(g, Parity::Even, 5);
        let gx = spectral_derivative(&phi, Axis::X1, 1).unwrap();
        let gy = spectral_derivative(&phi, Axis::X2, 1).unwrap();
        let (p1, p2) = helmholtz_project_h(&gx, &gy).unwrap();
        assert!(p1.max_abs_coeff() < 1e-14 && p2.max_abs_coeff() < 1e-14);
        let (r1, r2) = perp_grad(&phi).unwrap();
        let (p1, p2) = helmholtz_project_h(&r1, &r2).unwrap();
        assert!(p1.max_diff(&r1) < 1e-14 && p2.max_diff(&r2) < 1e-14);
    }

    #[test]
    fn projection_is_idempotent_and_solenoidal() {
        let g = make_grid(16, 8, 5, 7.0).unwrap();
        let u1 = random_smooth(g, Parity::Even, 7);
        let u2 = random_smooth(g, Parity::Even, 8);
        let (p1, p2) = helmholtz_project_h(&u1, &u2).unwrap();
        let div = div_h(&p1, &p2).unwrap();
        assert!(transform_inverse(&div).max_abs() < 1e-12);
        let (q1, q2) = helmholtz_project_h(&p1, &p2).unwrap();
        assert!(q1.max_diff(&p1) < 1e-13 && q2.max_diff(&p2) < 1e-13);
        // orthogonal to gradients
        let phi = random_smooth(g, Parity::Even, 9);
        let gx = spectral_derivative(&phi, Axis::X1, 1).unwrap();
        let gy = spectral_derivative(&phi, Axis::X2, 1).unwrap();
        let ip = p1.inner(&gx).unwrap() + p2.inner(&gy).unwrap();
        assert!(ip.abs() < 1e-11);
    }

    #[test]
    fn vertical_average_examples() {
        let g = make_grid(8, 8, 9, 2.0 * PI).unwrap();
        let c = transform_forward(&ParityField::from_fn(g, Parity::Even, |_, _, z| (PI * z).cos()));
        assert!(vertical_average(&c).max_abs_coeff() < 1e-14);
        let c = transform_forward(&ParityField::from_fn(g, Parity::Even, |_, _, _| 3.5));
        assert!((vertical_average(&c).get(0, 0, 0).re - 3.5).abs() < 1e-14);
        let s = transform_forward(&ParityField::from_fn(g, Parity::Odd, |_, _, z| (PI * z).sin()));
        assert!((vertical_average(&s).get(0, 0, 0).re - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn dealias_examples() {
        let g = g2();
        let inside = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, y, _| (2.0 * x).cos() + (5.0 * y).sin()));
        assert!(dealias(&inside).max_diff(&inside) < 1e-15);
        let top = transform_forward(&ParityField::from_fn(g, Parity::Even, |x, _, _| (8.0 * x).cos()));
        assert!(dealias(&top).max_abs_coeff() == 0.0);
        let once = dealias(&random_smooth(g, Parity::Even, 1));
        assert_eq!(dealias(&once), once);
    }

    /// Exact product by brute-force convolution of the retained modes.
    fn convolution_product(a: &SpectralField, b: &SpectralField) -> SpectralField {
        let g = a.grid;
        let mut out = SpectralField::zeros(g, Parity::Even);
        for ia2 in 0..g.ny {
            for ia1 in 0..g.nx {
                let ca = a.get(ia1, ia2, 0);
                if ca.norm() == 0.0 {
                    continue;
                }
                for ib2 in 0..g.ny {
                    for ib1 in 0..g.nx {
                        let cb = b.get(ib1, ib2, 0);
                        let j1 = Grid::signed_index(ia1, g.nx) + Grid::signed_index(ib1, g.nx);
                        let j2 = Grid::signed_index(ia2, g.ny) + Grid::signed_index(ib2, g.ny);
                        if 3 * j1.unsigned_abs() as usize >= g.nx || 3 * j2.unsigned_abs() as usize >= g.ny {
                            continue;
                        }
                        let s1 = j1.rem_euclid(g.nx as i64) as usize;
                        let s2 = j2.rem_euclid(g.ny as i64) as usize;
                        let i = g.idx(s1, s2, 0);
                        out.coeffs[i] += ca * cb;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn dealiased_product_matches_exact_convolution() {
        let g = g2();
        let a = dealias(&random_smooth(g, Parity::Even, 21));
        let b = dealias(&random_smooth(g, Parity::Even, 22));
        let pa = transform_inverse(&a);
        let pb = transform_inverse(&b);
        let prod = ParityField::new(g, Parity::Even, pa.values.iter().zip(&pb.values).map(|(x, y)| x * y).collect()).unwrap();
        let pseudo = dealias(&transform_forward(&prod));
        let exact = convolution_product(&a, &b);
        assert!(pseudo.max_diff(&exact) < 1e-12);
    }
}
