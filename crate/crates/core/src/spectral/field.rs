use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

/// Symmetry of a field under reflection `z -> -z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// Cosine series; zero normal derivative at the walls.
    Even,
    /// Sine series; vanishes at the walls.
    Odd,
}

impl Parity {
    pub fn flipped(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Real samples on the collocation grid, index `(j * ny + i2) * nx + i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityField {
    pub grid: Grid,
    pub parity: Parity,
    pub values: Vec<f64>,
}

impl ParityField {
    pub fn new(grid: Grid, parity: Parity, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ParityField { grid, parity, values })
    }

    pub fn zeros(grid: Grid, parity: Parity) -> Self {
        ParityField { grid, parity, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(x, y, z)` on the grid.
    pub fn from_fn(grid: Grid, parity: Parity, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for j in 0..grid.nz {
            let z = grid.z(j);
            for i2 in 0..grid.ny {
                let y = grid.y(i2);
                for i1 in 0..grid.nx {
                    values[grid.idx(i1, i2, j)] = f(grid.x(i1), y, z);
                }
            }
        }
        ParityField { grid, parity, values }
    }

    pub fn at(&self, i1: usize, i2: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i1, i2, j)]
    }

    /// Grid quadrature (uniform horizontally, trapezoidal vertically).
    pub fn integrate(&self) -> f64 {
        integrate_samples(&self.grid, &self.values)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        integrate_samples(&self.grid, &sq)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ParityField {
        ParityField {
            grid: self.grid,
            parity: self.parity,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Integrates pointwise samples laid out on `grid`.
pub fn integrate_samples(grid: &Grid, values: &[f64]) -> f64 {
    let plane = grid.plane_len();
    let sums: Vec<f64> = (0..grid.nz)
        .map(|j| grid.z_weight(j) * pairwise_sum(&values[j * plane..(j + 1) * plane]))
        .collect();
    pairwise_sum(&sums) * grid.cell_area()
}

/// Fourier / cosine / sine coefficients, index `(kappa * ny + i2) * nx + i1`.
///
/// The physical field is `sum c(xi, kappa) e^{i xi.x} cos(kappa pi z)` for even
/// parity and the same with `sin` for odd parity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub parity: Parity,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, parity: Parity) -> Self {
        SpectralField { grid, parity, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn new(grid: Grid, parity: Parity, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField { grid, parity, coeffs })
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize, kappa: usize) -> Complex64 {
        self.coeffs[self.grid.idx(i1, i2, kappa)]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, kappa: usize, c: Complex64) {
        let i = self.grid.idx(i1, i2, kappa);
        self.coeffs[i] = c;
    }

    /// Quadrature weight of vertical mode `kappa`, consistent with the
    /// trapezoidal rule on the collocation grid.
    pub fn vertical_weight(grid: &Grid, parity: Parity, kappa: usize) -> f64 {
        let top = grid.top_mode();
        match parity {
            Parity::Even => {
                if kappa == 0 || kappa == top {
                    1.0
                } else {
                    0.5
                }
            }
            Parity::Odd => {
                if kappa == 0 || kappa == top {
                    0.0
                } else {
                    0.5
                }
            }
        }
    }

    /// `L^2` inner product via Parseval.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_compatible(other)?;
        let plane = self.grid.plane_len();
        let sums: Vec<f64> = (0..self.grid.nz)
            .map(|k| {
                let w = Self::vertical_weight(&self.grid, self.parity, k);
                let terms: Vec<f64> = self.coeffs[k * plane..(k + 1) * plane]
                    .iter()
                    .zip(&other.coeffs[k * plane..(k + 1) * plane])
                    .map(|(a, b)| (a.conj() * b).re)
                    .collect();
                w * pairwise_sum(&terms)
            })
            .collect();
        Ok(pairwise_sum(&sums) * self.grid.area())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.inner(self).expect("self is compatible with itself")
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        if self.parity != other.parity {
            return Err(Error::ShapeMismatch("fields have different parity".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        Ok(SpectralField {
            grid: self.grid,
            parity: self.parity,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect(),
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Largest coefficient difference.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Applies `f(i1, i2, kappa, c)` to every coefficient.
    pub fn map_modes(&self, f: impl Fn(usize, usize, usize, Complex64) -> Complex64) -> SpectralField {
        let g = self.grid;
        let mut out = self.clone();
        for k in 0..g.nz {
            for i2 in 0..g.ny {
                for i1 in 0..g.nx {
                    let i = g.idx(i1, i2, k);
                    out.coeffs[i] = f(i1, i2, k, self.coeffs[i]);
                }
            }
        }
        out
    }

    /// Zeros the horizontal Nyquist rows and the top vertical mode, which
    /// have no partner in a real-valued or parity-consistent expansion.
    pub fn without_nyquist(&self) -> SpectralField {
        let g = self.grid;
        let top = g.top_mode();
        self.map_modes(|i1, i2, k, c| {
            if g.is_nyquist_x(i1) || g.is_nyquist_y(i2) || (k == top && g.nz > 1) {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
    }
}
