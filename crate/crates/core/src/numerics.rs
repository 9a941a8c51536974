//! Small numerical helpers shared across modules.

/// Pairwise (cascade) summation with a fixed split order, so results do not
/// depend on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Least-squares slope and intercept of `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// C-infinity transition from 0 (at `s <= 0`) to 1 (at `s >= 1`).
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Derivative of [`smooth_step`] with respect to `s`.
pub fn smooth_step_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        let da = a / (s * s);
        let db = -b / ((1.0 - s) * (1.0 - s));
        (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
    }
}

/// Smooth plateau: 0 outside `[lo, hi]`, 1 on the middle half, C-infinity.
pub fn plateau(x: f64, lo: f64, hi: f64) -> f64 {
    let w = 0.25 * (hi - lo);
    if x <= lo || x >= hi {
        0.0
    } else if x < lo + w {
        smooth_step((x - lo) / w)
    } else if x > hi - w {
        smooth_step((hi - x) / w)
    } else {
        1.0
    }
}

/// Derivative of [`plateau`].
pub fn plateau_derivative(x: f64, lo: f64, hi: f64) -> f64 {
    let w = 0.25 * (hi - lo);
    if x <= lo || x >= hi {
        0.0
    } else if x < lo + w {
        smooth_step_derivative((x - lo) / w) / w
    } else if x > hi - w {
        -smooth_step_derivative((hi - x) / w) / w
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn fit_recovers_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((loglog_slope(&x, &y) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.9, 1.0, 2.0), 0.0);
        assert_eq!(plateau(1.5, 1.0, 2.0), 1.0);
        let v = plateau(1.1, 1.0, 2.0);
        assert!(v > 0.0 && v < 1.0);
        let h = 1e-6;
        let fd = (plateau(1.1 + h, 1.0, 2.0) - plateau(1.1 - h, 1.0, 2.0)) / (2.0 * h);
        assert!((fd - plateau_derivative(1.1, 1.0, 2.0)).abs() < 1e-6);
    }
}
