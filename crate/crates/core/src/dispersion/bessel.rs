use std::f64::consts::PI;

use crate::error::{Error, Result};

const SERIES_MAX: f64 = 8.0;
const ASYMPTOTIC_MIN: f64 = 30.0;

fn series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, prefactor) = match order {
        0 => (1.0, 1.0),
        _ => (1.0, 0.5 * x),
    };
    let mut sum = term;
    for k in 1..80 {
        let kf = k as f64;
        term *= -q / (kf * (kf + order as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    prefactor * sum
}

/// Miller's backward recurrence normalised by `J_0 + 2 sum J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64) {
    let mut n = x as usize + 40;
    n += n % 2;
    let (mut jp, mut j) = (0.0, 1e-30);
    let (mut j0, mut j1) = (0.0, 0.0);
    let mut norm = 0.0;
    for m in (1..=n).rev() {
        let jm = 2.0 * m as f64 / x * j - jp;
        jp = j;
        j = jm;
        // j now holds J_{m-1}
        if (m - 1) % 2 == 0 && m > 1 {
            norm += 2.0 * j;
        }
        if m == 2 {
            j1 = j;
        }
        if m == 1 {
            j0 = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            j1 *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let chi = x - (order as f64 * 0.5 + 0.25) * PI;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > last {
            break;
        }
        last = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Bessel function of the first kind `J_order(x)` for `order` in `{0, 1}`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if order > 1 {
        return Err(Error::InvalidArgument(format!("Bessel order {order} not supported")));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("Bessel argument must be >= 0, got {x}")));
    }
    Ok(if x <= SERIES_MAX {
        series(order, x)
    } else if x < ASYMPTOTIC_MIN {
        let (j0, j1) = miller(x);
        if order == 0 {
            j0
        } else {
            j1
        }
    } else {
        hankel(order, x)
    })
}

pub(crate) fn j0(x: f64) -> f64 {
    bessel_j(0, x.abs()).expect("order 0 is supported")
}

pub(crate) fn j1(x: f64) -> f64 {
    bessel_j(1, x.abs()).expect("order 1 is supported")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_n(x) = (1 / 2 pi) int_0^{2 pi} cos(n t - x sin t) dt`, trapezoid
    /// rule on a periodic integrand.
    fn integral_oracle(n: u32, x: f64) -> f64 {
        let m = 4000;
        let h = 2.0 * PI / m as f64;
        (0..m).map(|i| (n as f64 * i as f64 * h - x * (i as f64 * h).sin()).cos()).sum::<f64>() / m as f64
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0, 2.404_825_557_695_773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn agrees_with_integral_representation() {
        let mut x = 0.01;
        while x < 200.0 {
            for n in 0..2 {
                let got = bessel_j(n, x).unwrap();
                let want = integral_oracle(n, x);
                assert!((got - want).abs() < 1e-12, "J{n}({x}) = {got}, oracle {want}");
            }
            x *= 1.13;
        }
    }

    #[test]
    fn methods_agree_at_switch_points() {
        let (m0, m1) = miller(SERIES_MAX);
        assert!((series(0, SERIES_MAX) - m0).abs() < 1e-13);
        assert!((series(1, SERIES_MAX) - m1).abs() < 1e-13);
        let (m0, m1) = miller(ASYMPTOTIC_MIN);
        assert!((hankel(0, ASYMPTOTIC_MIN) - m0).abs() < 1e-13);
        assert!((hankel(1, ASYMPTOTIC_MIN) - m1).abs() < 1e-13);
    }

    #[test]
    fn derivative_identity() {
        for &x in &[0.5, 3.0, 12.0, 45.0] {
            let h = 1e-5;
            let d = (j0(x + h) - j0(x - h)) / (2.0 * h);
            assert!((d + j1(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_bound() {
        let mut x = 0.05;
        while x < 500.0 {
            assert!(j0(x).abs() <= (2.0 / (PI * x)).sqrt());
            x += 0.05;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_j(2, 1.0).is_err());
        assert!(bessel_j(0, -1.0).is_err());
    }
}
