use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::field::{Parity, ParityField, SpectralField};
use super::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Horizontal 2D FFT of every plane in `buf` (length `nx * ny * planes`).
fn fft_horizontal(grid: &Grid, buf: &mut [Complex64], inverse: bool) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (fx, fy) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            (p.plan_fft_inverse(nx), p.plan_fft_inverse(ny))
        } else {
            (p.plan_fft_forward(nx), p.plan_fft_forward(ny))
        }
    });
    // rows are contiguous: one batched call covers all planes
    fx.process(buf);
    let plane = nx * ny;
    let mut t = vec![Complex64::new(0.0, 0.0); plane];
    for chunk in buf.chunks_mut(plane) {
        for i2 in 0..ny {
            for i1 in 0..nx {
                t[i1 * ny + i2] = chunk[i2 * nx + i1];
            }
        }
        fy.process(&mut t);
        for i2 in 0..ny {
            for i1 in 0..nx {
                chunk[i2 * nx + i1] = t[i1 * ny + i2];
            }
        }
    }
}

/// Dense vertical transform matrices. `forward[k][j]` maps samples to
/// coefficients and `inverse[j][k]` maps back.
struct VerticalBasis {
    n: usize,
    forward: Vec<f64>,
    inverse: Vec<f64>,
}

impl VerticalBasis {
    fn new(nz: usize, parity: Parity) -> Self {
        let mut forward = vec![0.0; nz * nz];
        let mut inverse = vec![0.0; nz * nz];
        if nz == 1 {
            if parity == Parity::Even {
                forward[0] = 1.0;
                inverse[0] = 1.0;
            }
            return VerticalBasis { n: 1, forward, inverse };
        }
        let big_n = (nz - 1) as f64;
        let top = nz - 1;
        for k in 0..nz {
            for j in 0..nz {
                let arg = PI * (k * j) as f64 / big_n;
                match parity {
                    Parity::Even => {
                        let wj = if j == 0 || j == top { 0.5 } else { 1.0 };
                        let ck = if k == 0 || k == top { 1.0 } else { 2.0 };
                        forward[k * nz + j] = ck * wj * arg.cos() / big_n;
                        inverse[j * nz + k] = arg.cos();
                    }
                    Parity::Odd => {
                        let interior = j > 0 && j < top && k > 0 && k < top;
                        if interior {
                            forward[k * nz + j] = 2.0 * arg.sin() / big_n;
                            inverse[j * nz + k] = arg.sin();
                        }
                    }
                }
            }
        }
        VerticalBasis { n: nz, forward, inverse }
    }

    /// Applies `mat` across the planes of `buf` at every horizontal point.
    fn apply(&self, grid: &Grid, mat: &[f64], buf: &mut [Complex64]) {
        let n = self.n;
        if n == 1 {
            if mat[0] != 1.0 {
                buf.iter_mut().for_each(|c| *c *= mat[0]);
            }
            return;
        }
        let plane = grid.plane_len();
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for p in 0..plane {
            for (j, c) in col.iter_mut().enumerate() {
                *c = buf[j * plane + p];
            }
            for r in 0..n {
                let row = &mat[r * n..(r + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in row.iter().zip(&col) {
                    acc += c * m;
                }
                buf[r * plane + p] = acc;
            }
        }
    }
}

/// Samples to coefficients: horizontal FFT normalised by `1/(nx ny)`,
/// then DCT-I (even) or DST-I (odd) in the vertical.
pub fn transform_forward(f: &ParityField) -> SpectralField {
    let grid = f.grid;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_horizontal(&grid, &mut buf, false);
    let scale = 1.0 / grid.plane_len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    let basis = VerticalBasis::new(grid.nz, f.parity);
    basis.apply(&grid, &basis.forward, &mut buf);
    SpectralField { grid, parity: f.parity, coeffs: buf }
}

/// Coefficients to samples. The imaginary part, which vanishes for
/// Hermitian-symmetric input, is discarded.
pub fn transform_inverse(spec: &SpectralField) -> ParityField {
    let grid = spec.grid;
    let mut buf = spec.coeffs.clone();
    let basis = VerticalBasis::new(grid.nz, spec.parity);
    basis.apply(&grid, &basis.inverse, &mut buf);
    fft_horizontal(&grid, &mut buf, true);
    ParityField { grid, parity: spec.parity, values: buf.iter().map(|c| c.re).collect() }
}

/// Coefficients to complex samples, for spectra without Hermitian symmetry.
pub fn transform_inverse_complex(spec: &SpectralField) -> Vec<Complex64> {
    let grid = spec.grid;
    let mut buf = spec.coeffs.clone();
    let basis = VerticalBasis::new(grid.nz, spec.parity);
    basis.apply(&grid, &basis.inverse, &mut buf);
    fft_horizontal(&grid, &mut buf, true);
    buf
}
