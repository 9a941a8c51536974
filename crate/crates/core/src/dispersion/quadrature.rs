use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [0, 1]; odd indices are the 7-point Gauss nodes
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 200_000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Summed `|K15 - G7|` over the final panels.
    pub error: f64,
    /// Integral of `|f|`, the scale the tolerance is measured against.
    pub l1: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    l1: f64,
}

fn gauss_kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += (f1 + f2) * WGK[i];
        l1 += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * WG[i / 2];
        }
    }
    Panel { a, b, value: k * h, error: ((k - g) * h).norm(), l1: l1 * h.abs() }
}

/// Adaptive Gauss-Kronrod (7/15) integration of a complex integrand over
/// `[a, b]`, starting from `initial_panels` equal panels and bisecting the
/// worst panel until the summed error estimate drops below
/// `rel_tol * int |f|` (or `abs_floor`, whichever is larger).
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    initial_panels: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let n0 = initial_panels.clamp(1, MAX_PANELS / 2);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            gauss_kronrod(&f, lo, hi)
        })
        .collect();
    loop {
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let l1: f64 = panels.iter().map(|p| p.l1).sum();
        let target = (rel_tol * l1).max(abs_floor);
        if err <= target {
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(Quadrature { value, error: err, l1, panels: panels.len() });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { achieved: err / l1.max(f64::MIN_POSITIVE), requested: rel_tol });
        }
        // bisect every panel above the mean share of the budget
        let share = target / panels.len() as f64;
        let mut next = Vec::with_capacity(panels.len() * 2);
        let mut split_any = false;
        for p in panels {
            if p.error > share && p.b - p.a > 1e-14 * (1.0 + p.a.abs()) {
                let m = 0.5 * (p.a + p.b);
                next.push(gauss_kronrod(&f, p.a, m));
                next.push(gauss_kronrod(&f, m, p.b));
                split_any = true;
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            let err: f64 = panels.iter().map(|p| p.error).sum();
            let l1: f64 = panels.iter().map(|p| p.l1).sum();
            return Err(Error::Quadrature { achieved: err / l1.max(f64::MIN_POSITIVE), requested: rel_tol });
        }
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, initial_panels: usize) -> Result<f64> {
    Ok(integrate(|x| Complex64::new(f(x), 0.0), a, b, rel_tol, 0.0, initial_panels)?.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_for_polynomials() {
        let q = integrate_real(|x| x.powi(10) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - (8.0 + 1.0);
        assert!((q - exact).abs() < 1e-12);
    }

    #[test]
    fn sine_integral() {
        assert!((integrate_real(f64::sin, 0.0, PI, 1e-12, 1).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn fast_oscillation() {
        let t = 500.0;
        let q = integrate(|x| Complex64::from_polar(1.0, t * x), 0.0, 1.0, 1e-10, 0.0, 4).unwrap();
        let exact = (Complex64::from_polar(1.0, t) - 1.0) / Complex64::new(0.0, t);
        assert!((q.value - exact).norm() < 1e-10);
    }

    #[test]
    fn endpoint_singularity_refines() {
        let q = integrate_real(|x| x.sqrt(), 0.0, 1.0, 1e-10, 1).unwrap();
        assert!((q - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(integrate_real(|x| x, 1.0, 1.0, 1e-8, 3).unwrap(), 0.0);
        assert!(integrate_real(|x| x, 2.0, 1.0, 1e-8, 3).is_err());
    }
}
