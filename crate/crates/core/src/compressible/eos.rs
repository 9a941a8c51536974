use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// 8-point Gauss-Legendre rule on [0, 1]
const GL_X: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];
const GL_W: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

/// Isentropic pressure `p(rho) = rho^gamma / gamma`, normalised so that
/// `p'(1) = 1`, with pressure potential `H(rho) = rho int_1^rho p(z)/z^2 dz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    pub gamma: f64,
}

impl EquationOfState {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.5 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must exceed 3/2, got {gamma}")));
        }
        Ok(EquationOfState { gamma })
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma) / self.gamma
    }

    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 1.0)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.pressure_derivative(rho).sqrt()
    }

    /// `H(rho) = rho (rho^{gamma-1} - 1) / (gamma (gamma - 1))`.
    pub fn h(&self, rho: f64) -> f64 {
        let g = self.gamma;
        rho * (rho.powf(g - 1.0) - 1.0) / (g * (g - 1.0))
    }

    /// `H'(rho) = rho^{gamma-1} / (gamma - 1) - 1 / (gamma (gamma - 1))`.
    pub fn h_prime(&self, rho: f64) -> f64 {
        let g = self.gamma;
        rho.powf(g - 1.0) / (g - 1.0) - 1.0 / (g * (g - 1.0))
    }

    /// `H''(rho) = p'(rho) / rho = rho^{gamma-2}`.
    pub fn h_second(&self, rho: f64) -> f64 {
        rho.powf(self.gamma - 2.0)
    }

    /// Inverse of `H'`.
    pub fn h_prime_inverse(&self, y: f64) -> Result<f64> {
        let g = self.gamma;
        let base = (g - 1.0) * (y + 1.0 / (g * (g - 1.0)));
        if !(base > 0.0) {
            return Err(Error::Positivity(format!("H'(rho) = {y} has no positive solution")));
        }
        Ok(base.powf(1.0 / (g - 1.0)))
    }

    /// `H'(base + delta) - H'(base)` without cancellation.
    pub fn h_prime_increment(&self, base: f64, delta: f64) -> f64 {
        if self.gamma == 2.0 {
            return delta;
        }
        let mut acc = 0.0;
        for (x, w) in GL_X.iter().zip(&GL_W) {
            acc += w * self.h_second(base + x * delta);
        }
        delta * acc
    }

    /// `H(rho) - H'(r)(rho - r) - H(r)` for `rho = r + delta`, evaluated as
    /// `delta^2 int_0^1 (1 - s) H''(r + s delta) ds`.
    pub fn bregman(&self, r: f64, delta: f64) -> f64 {
        if self.gamma == 2.0 {
            return 0.5 * delta * delta;
        }
        let mut acc = 0.0;
        for (x, w) in GL_X.iter().zip(&GL_W) {
            acc += w * (1.0 - x) * self.h_second(r + x * delta);
        }
        delta * delta * acc
    }
}

impl Default for EquationOfState {
    fn default() -> Self {
        EquationOfState { gamma: 2.0 }
    }
}

/// Exponents of the multiscale regime: Rossby number `eps`, Mach number
/// `eps^m`, Froude number `eps^n`, viscosity `eps^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub eps: f64,
    pub m: f64,
    pub n: f64,
    pub alpha: f64,
}

impl ScalingRegime {
    /// Checks `0 < eps <= 1`, `m/2 > n >= 1` and `alpha > 0`.
    pub fn new(eps: f64, m: f64, n: f64, alpha: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
        }
        validate_exponents(m, n, alpha)?;
        Ok(ScalingRegime { eps, m, n, alpha })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(eps, self.m, self.n, self.alpha)
    }

    pub fn omega(&self) -> f64 {
        self.eps.powf(self.m - 1.0)
    }

    pub fn mach(&self) -> f64 {
        self.eps.powf(self.m)
    }

    pub fn froude(&self) -> f64 {
        self.eps.powf(self.n)
    }

    pub fn viscosity(&self) -> f64 {
        self.eps.powf(self.alpha)
    }

    /// `eps^{2(m-n)}`, the strength of stratification in the static state.
    pub fn stratification(&self) -> f64 {
        self.eps.powf(2.0 * (self.m - self.n))
    }

    /// `eps^{-2m}`.
    pub fn pressure_factor(&self) -> f64 {
        self.eps.powf(-2.0 * self.m)
    }
}

/// The admissible regime `m/2 > n >= 1`, `alpha > 0`.
pub fn validate_exponents(m: f64, n: f64, alpha: f64) -> Result<()> {
    if !(0.5 * m > n && n >= 1.0) {
        return Err(Error::Regime(format!("m = {m}, n = {n}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Regime(format!("alpha = {alpha}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation() {
        for g in [2.0, 5.0 / 3.0, 1.6, 3.0] {
            let e = EquationOfState::new(g).unwrap();
            assert_eq!(e.pressure(0.0), 0.0);
            assert!((e.pressure_derivative(1.0) - 1.0).abs() < 1e-15);
            assert!((e.h_second(1.0) - 1.0).abs() < 1e-15);
            assert_eq!(e.h(1.0), 0.0);
            // rho H' - H = p
            for rho in [0.3, 1.0, 2.7] {
                assert!((rho * e.h_prime(rho) - e.h(rho) - e.pressure(rho)).abs() < 1e-14);
            }
        }
        assert!(EquationOfState::new(1.4).is_err());
    }

    #[test]
    fn potential_matches_definition() {
        // H(rho) = rho int_1^rho p(z) / z^2 dz by a fine midpoint rule
        let e = EquationOfState::new(5.0 / 3.0).unwrap();
        let rho: f64 = 1.8;
        let n = 200_000;
        let h = (rho - 1.0) / n as f64;
        let integral: f64 = (0..n).map(|i| {
            let z = 1.0 + (i as f64 + 0.5) * h;
            e.pressure(z) / (z * z)
        }).sum::<f64>() * h;
        assert!((e.h(rho) - rho * integral).abs() < 1e-9);
    }

    #[test]
    fn increments_match_direct_evaluation() {
        let e = EquationOfState::new(5.0 / 3.0).unwrap();
        let (r, d) = (0.9, 0.05);
        let direct = e.h_prime(r + d) - e.h_prime(r);
        assert!((e.h_prime_increment(r, d) - direct).abs() < 1e-14);
        let direct = e.h(r + d) - e.h_prime(r) * d - e.h(r);
        assert!((e.bregman(r, d) - direct).abs() < 1e-14);
        assert!(e.bregman(r, -0.3) > 0.0);
        let y = e.h_prime(1.3);
        assert!((e.h_prime_inverse(y).unwrap() - 1.3).abs() < 1e-14);
    }

    #[test]
    fn regime_constraints() {
        let r = ScalingRegime::new(0.1, 3.0, 1.0, 1.0).unwrap();
        assert!((r.omega() - 0.01).abs() < 1e-15);
        assert!((r.mach() - 1e-3).abs() < 1e-15);
        assert!(ScalingRegime::new(0.1, 2.0, 1.0, 1.0).is_err());
        assert!(ScalingRegime::new(0.1, 3.0, 0.5, 1.0).is_err());
        assert!(ScalingRegime::new(0.1, 3.0, 1.0, 0.0).is_err());
        assert!(ScalingRegime::new(1.5, 3.0, 1.0, 1.0).is_err());
    }
}
