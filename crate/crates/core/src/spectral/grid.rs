use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Computational grid of the slab surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Horizontal period.
    pub length: f64,
}

/// Builds a grid, validating the dimensions.
///
/// `nz = 1` is accepted as a purely horizontal grid carrying only the
/// `k = 0` vertical mode.
pub fn make_grid(nx: usize, ny: usize, nz: usize, length: f64) -> Result<Grid> {
    if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 2 || ny < 2 {
        return Err(Error::InvalidDimension(format!(
            "horizontal mode counts must be powers of two >= 2, got {nx} x {ny}"
        )));
    }
    if nz == 0 {
        return Err(Error::InvalidDimension("nz must be at least 1".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidDimension(format!(
            "horizontal period must be positive, got {length}"
        )));
    }
    Ok(Grid { nx, ny, nz, length })
}

impl Grid {
    pub fn plane_len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The same horizontal grid with a single vertical level.
    pub fn horizontal(&self) -> Grid {
        Grid { nz: 1, ..*self }
    }

    pub fn is_horizontal(&self) -> bool {
        self.nz == 1
    }

    #[inline]
    pub fn idx(&self, i1: usize, i2: usize, k: usize) -> usize {
        (k * self.ny + i2) * self.nx + i1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.length / self.ny as f64
    }

    /// Vertical spacing, `1` for a horizontal grid.
    pub fn dz(&self) -> f64 {
        if self.nz > 1 {
            1.0 / (self.nz - 1) as f64
        } else {
            1.0
        }
    }

    /// Index of the highest vertical mode `N = nz - 1`.
    pub fn top_mode(&self) -> usize {
        self.nz - 1
    }

    /// Signed integer wavenumber for FFT slot `i` of an `n`-point axis.
    #[inline]
    pub fn signed_index(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Wavenumber spacing `2 pi / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    #[inline]
    pub fn xi1(&self, i1: usize) -> f64 {
        self.dxi() * Self::signed_index(i1, self.nx) as f64
    }

    #[inline]
    pub fn xi2(&self, i2: usize) -> f64 {
        self.dxi() * Self::signed_index(i2, self.ny) as f64
    }

    /// Vertical wavenumber `k pi` of vertical mode `kappa`.
    #[inline]
    pub fn kz(&self, kappa: usize) -> f64 {
        kappa as f64 * PI
    }

    pub fn x(&self, i1: usize) -> f64 {
        i1 as f64 * self.dx()
    }

    pub fn y(&self, i2: usize) -> f64 {
        i2 as f64 * self.dy()
    }

    pub fn z(&self, j: usize) -> f64 {
        if self.nz > 1 {
            j as f64 / (self.nz - 1) as f64
        } else {
            0.0
        }
    }

    pub fn is_nyquist_x(&self, i1: usize) -> bool {
        i1 == self.nx / 2
    }

    pub fn is_nyquist_y(&self, i2: usize) -> bool {
        i2 == self.ny / 2
    }

    /// Trapezoidal weight of vertical level `j` (sums to 1).
    pub fn z_weight(&self, j: usize) -> f64 {
        if self.nz == 1 {
            1.0
        } else if j == 0 || j == self.nz - 1 {
            0.5 * self.dz()
        } else {
            self.dz()
        }
    }

    /// Area of one horizontal cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.length * self.length
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_tables() {
        let g = make_grid(8, 8, 4, 2.0 * PI).unwrap();
        let xs: Vec<i64> = (0..8).map(|i| Grid::signed_index(i, 8)).collect();
        let mut sorted = xs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(g.xi1(1), 1.0);
        let ks: Vec<f64> = (0..4).map(|k| g.kz(k)).collect();
        assert_eq!(ks, vec![0.0, PI, 2.0 * PI, 3.0 * PI]);
        assert_eq!(g.xi1(0), 0.0);
    }

    #[test]
    fn horizontal_grid() {
        let g = make_grid(16, 16, 1, 2.0 * PI).unwrap();
        assert!(g.is_horizontal());
        assert_eq!(g.kz(g.top_mode()), 0.0);
    }

    #[test]
    fn period_scaling() {
        let g = make_grid(8, 8, 4, 4.0 * PI).unwrap();
        assert!((g.dxi() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(matches!(make_grid(6, 8, 4, 1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(make_grid(8, 8, 0, 1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(make_grid(8, 8, 4, 0.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(make_grid(8, 8, 4, -1.0), Err(Error::InvalidDimension(_))));
    }
}
