use super::eos::{EquationOfState, ScalingRegime};
use crate::error::{Error, Result};
use crate::spectral::{Grid, Parity, ParityField};

/// Density and velocity on the collocation grid: `rho`, `u_1`, `u_2` even
/// and `u_3` odd in `x_3`, so `u_3` vanishes on both walls.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub rho: ParityField,
    pub u: [ParityField; 3],
    pub time: f64,
}

impl FluidState {
    pub fn new(rho: ParityField, u: [ParityField; 3], time: f64) -> Result<Self> {
        let g = rho.grid;
        if u.iter().any(|f| f.grid != g) {
            return Err(Error::ShapeMismatch("density and velocity grids differ".into()));
        }
        let got = [rho.parity, u[0].parity, u[1].parity, u[2].parity];
        if got != [Parity::Even, Parity::Even, Parity::Even, Parity::Odd] {
            return Err(Error::ShapeMismatch(format!("unexpected parities {got:?}")));
        }
        let min = rho.values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::Positivity(format!("minimum density {min:.3e}")));
        }
        Ok(FluidState { rho, u, time })
    }

    pub fn grid(&self) -> Grid {
        self.rho.grid
    }

    /// `int rho`.
    pub fn mass(&self) -> f64 {
        self.rho.integrate()
    }

    /// `sqrt(rho) u` componentwise.
    pub fn sqrt_rho_u(&self) -> [Vec<f64>; 3] {
        std::array::from_fn(|i| {
            self.rho.values.iter().zip(&self.u[i].values).map(|(r, u)| r.sqrt() * u).collect()
        })
    }
}

/// The velocity parities `(even, even, odd)`.
pub const VELOCITY_PARITY: [Parity; 3] = [Parity::Even, Parity::Even, Parity::Odd];

/// Static density solving `H'(rho) = eps^{2(m-n)} G + H'(1)` with `G = -x_3`.
pub fn static_state(regime: &ScalingRegime, eos: &EquationOfState, grid: Grid) -> Result<ParityField> {
    let c = regime.stratification();
    let h1 = eos.h_prime(1.0);
    let mut values = Vec::with_capacity(grid.len());
    let column: Vec<f64> = (0..grid.nz)
        .map(|j| {
            let z = grid.z(j);
            if eos.gamma == 2.0 {
                Ok(1.0 - c * z)
            } else {
                eos.h_prime_inverse(h1 - c * z)
            }
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = column.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Positivity(format!("static density {bad:.3e} is not positive")));
    }
    for rho in &column {
        values.extend(std::iter::repeat_n(*rho, grid.plane_len()));
    }
    ParityField::new(grid, Parity::Even, values)
}

/// Fraction of the horizontal box, at each periodic edge, that should stay
/// free of data.
const SUPPORT_MARGIN: f64 = 0.1;

fn touches_boundary(f: &ParityField) -> bool {
    let g = f.grid;
    let scale = f.max_abs();
    if scale == 0.0 {
        return false;
    }
    let edge = |x: f64| x < SUPPORT_MARGIN * g.length || x > (1.0 - SUPPORT_MARGIN) * g.length;
    (0..g.nz).any(|k| {
        (0..g.ny).any(|i2| {
            (0..g.nx).any(|i1| (edge(g.x(i1)) || edge(g.y(i2))) && f.at(i1, i2, k).abs() > 1e-6 * scale)
        })
    })
}

/// Ill-prepared initial state `rho = rho~ + eps^m rho1`, `u = u0`.
///
/// Returns warnings when the data reach into the outer tenth of the periodic
/// box, where they stop approximating compactly supported data.
pub fn initial_state(
    rho1: &ParityField,
    u0: &[ParityField; 3],
    regime: &ScalingRegime,
    eos: &EquationOfState,
    grid: Grid,
) -> Result<(FluidState, Vec<String>)> {
    if rho1.grid != grid || rho1.parity != Parity::Even {
        return Err(Error::ShapeMismatch("density perturbation must be even on the given grid".into()));
    }
    let tilde = static_state(regime, eos, grid)?;
    let mach = regime.mach();
    let rho: Vec<f64> = tilde.values.iter().zip(&rho1.values).map(|(t, r)| t + mach * r).collect();
    let state = FluidState::new(ParityField::new(grid, Parity::Even, rho)?, u0.clone(), 0.0)?;
    Ok((state, support_warnings(rho1, u0)))
}

/// Warnings for data that reach into the outer tenth of the periodic box.
pub fn support_warnings(rho1: &ParityField, u0: &[ParityField; 3]) -> Vec<String> {
    [("rho1", rho1), ("u1", &u0[0]), ("u2", &u0[1]), ("u3", &u0[2])]
        .into_iter()
        .filter(|(_, f)| touches_boundary(f))
        .map(|(name, _)| format!("{name} is not negligible within 10% of the periodic boundary"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn regime(eps: f64) -> ScalingRegime {
        ScalingRegime::new(eps, 3.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn gamma_two_is_affine() {
        let g = make_grid(4, 4, 9, 2.0 * PI).unwrap();
        let r = regime(0.3);
        let s = static_state(&r, &EquationOfState::default(), g).unwrap();
        let c = 0.3f64.powi(4);
        for j in 0..9 {
            assert!((s.at(1, 2, j) - (1.0 - c * g.z(j))).abs() < 1e-15);
        }
    }

    #[test]
    fn general_gamma_solves_balance() {
        let g = make_grid(2, 2, 5, 1.0).unwrap();
        let e = EquationOfState::new(5.0 / 3.0).unwrap();
        let r = regime(0.4);
        let s = static_state(&r, &e, g).unwrap();
        for j in 0..5 {
            let lhs = e.h_prime(s.at(0, 0, j));
            let rhs = -r.stratification() * g.z(j) + e.h_prime(1.0);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn vanishing_eps_gives_unit_density() {
        let g = make_grid(2, 2, 5, 1.0).unwrap();
        let s = static_state(&regime(1e-6), &EquationOfState::default(), g).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-20));
    }

    #[test]
    fn support_warning() {
        let g = make_grid(16, 16, 3, 10.0).unwrap();
        let r = regime(0.3);
        let e = EquationOfState::default();
        let zero = || ParityField::zeros(g, Parity::Even);
        let u = [zero(), zero(), ParityField::zeros(g, Parity::Odd)];
        let centred = ParityField::from_fn(g, Parity::Even, |x, y, _| (-((x - 5.0).powi(2) + (y - 5.0).powi(2))).exp());
        let (_, w) = initial_state(&centred, &u, &r, &e, g).unwrap();
        assert!(w.is_empty());
        let edge = ParityField::from_fn(g, Parity::Even, |x, _, _| (-(x - 0.5).powi(2)).exp());
        let (_, w) = initial_state(&edge, &u, &r, &e, g).unwrap();
        assert_eq!(w.len(), 1);
    }
}
