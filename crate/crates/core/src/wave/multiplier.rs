use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::{eigenbasis_closed, EigenSystem};
use crate::error::{Error, Result};

/// Largest sampled `|d^A E_j|` over an annulus `a <= |xi| <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierReport {
    pub order: u32,
    /// Sup over all samples, per branch `j = 1..4`.
    pub per_branch: [f64; 4],
    pub sup: f64,
    /// Sample points skipped because the closed form is degenerate there.
    pub excluded: usize,
    pub samples: usize,
}

type Vectors = [[Complex64; 4]; 4];

fn vectors_at(xi: [f64; 2], k: f64, omega: f64) -> Option<Vectors> {
    eigenbasis_closed(xi, k, omega).ok().map(|e: EigenSystem| e.vectors)
}

fn combine(terms: &[(f64, Vectors)]) -> Vectors {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (w, v) in terms {
        for j in 0..4 {
            for i in 0..4 {
                out[j][i] += v[j][i] * *w;
            }
        }
    }
    out
}

/// Central-difference stencils for every multi-index of the given order.
fn derivatives(xi: [f64; 2], k: f64, omega: f64, order: u32) -> Option<Vec<Vectors>> {
    let at = |d1: f64, d2: f64| vectors_at([xi[0] + d1, xi[1] + d2], k, omega);
    match order {
        0 => Some(vec![at(0.0, 0.0)?]),
        1 => {
            let h = 1e-5;
            let w = 0.5 / h;
            Some(vec![
                combine(&[(w, at(h, 0.0)?), (-w, at(-h, 0.0)?)]),
                combine(&[(w, at(0.0, h)?), (-w, at(0.0, -h)?)]),
            ])
        }
        2 => {
            let h = 1e-3;
            let w = 1.0 / (h * h);
            let c = at(0.0, 0.0)?;
            let w4 = 0.25 * w;
            Some(vec![
                combine(&[(w, at(h, 0.0)?), (-2.0 * w, c), (w, at(-h, 0.0)?)]),
                combine(&[(w, at(0.0, h)?), (-2.0 * w, c), (w, at(0.0, -h)?)]),
                combine(&[(w4, at(h, h)?), (-w4, at(h, -h)?), (-w4, at(-h, h)?), (w4, at(-h, -h)?)]),
            ])
        }
        _ => None,
    }
}

/// Samples `|d_xi^A E_j(xi, k, omega)|` for `|A| = order` on a polar grid of
/// `xi_samples` radii times `xi_samples` angles in `a <= |xi| <= b`, for every
/// `omega` in `omega_samples`.
pub fn multiplier_sup_check(
    a: f64,
    b: f64,
    k: f64,
    order: u32,
    omega_samples: &[f64],
    xi_samples: usize,
) -> Result<MultiplierReport> {
    if !(0.0 < a && a < b) {
        return Err(Error::InvalidArgument(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    if order > 2 {
        return Err(Error::InvalidArgument(format!("derivative order {order} exceeds 2")));
    }
    if xi_samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples per direction".into()));
    }
    let mut per_branch = [0.0f64; 4];
    let mut excluded = 0;
    let mut samples = 0;
    for &omega in omega_samples {
        for ir in 0..xi_samples {
            let r = a + (b - a) * ir as f64 / (xi_samples - 1) as f64;
            for ia in 0..xi_samples {
                let theta = 2.0 * PI * ia as f64 / xi_samples as f64;
                samples += 1;
                let Some(ds) = derivatives([r * theta.cos(), r * theta.sin()], k, omega, order) else {
                    excluded += 1;
                    continue;
                };
                for d in &ds {
                    for (j, v) in d.iter().enumerate() {
                        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                        per_branch[j] = per_branch[j].max(n);
                    }
                }
            }
        }
    }
    let sup = per_branch.iter().copied().fold(0.0, f64::max);
    Ok(MultiplierReport { order, per_branch, sup, excluded, samples })
}
