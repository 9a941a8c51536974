//! The six subcommands. Each writes its CSV series into the output directory
//! and returns a [`Summary`] with metrics and pass/fail per criterion.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rossbylab::compressible::{
    decompose_initial_data, run_limit, static_state, uniform_bounds_report, EquationOfState, ForceFlags, LimitConfig,
    LimitRun, ScalingRegime, Viscosity, VELOCITY_PARITY,
};
use rossbylab::dispersion::{
    decay_sweep, log_times, oscillatory_kernel, van_corput_bound, Branch, CutoffProfile, DecayConfig, DecaySweep,
};
use rossbylab::limit::{euler_step, integrate_qg, qg_step, QgOptions, QgRecord, QgState, Vorticity2D};
use rossbylab::spectral::{make_grid, transform_forward, Grid, Parity, ParityField, SpectralField};
use rossbylab::wave::{
    apply_b, assemble_mode_matrix, eigenbasis, eigenvalues_closed, eigenvalues_oracle, kernel_project,
    SpectralState4, WavePropagator,
};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, Subcommand};
use crate::output::{emit_report, CsvSeries, OutputError, Summary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] rossbylab::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {message}")]
    Report { path: PathBuf, message: String },
}

type Result<T> = std::result::Result<T, ExperimentError>;

pub const SPECTRUM_HEADER: [&str; 8] = ["xi2", "k", "omega", "lambda1", "lambda3", "gap", "residual", "identity_err"];
pub const DECAY_HEADER: [&str; 8] = ["t", "p", "k", "omega", "beta", "norm", "bound", "ratio"];
pub const SERIES_HEADER: [&str; 4] = ["t", "energy", "enstrophy", "maxvort"];
pub const LIMIT_HEADER: [&str; 7] = ["t", "eps", "delta", "Eeps", "energy", "mass", "dens_dev"];
pub const BUDGET_HEADER: [&str; 11] = [
    "t",
    "eps",
    "delta",
    "slack",
    "dissipation",
    "transport",
    "viscous",
    "coriolis",
    "pressure_potential",
    "pressure_divergence",
    "gravity",
];

/// Runs the configured subcommand and writes `summary.json` next to its CSVs.
pub fn run_experiment(cfg: &RunConfig) -> Result<Summary> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| OutputError::Io { path: dir.to_path_buf(), source: e })?;
    let mut summary = match cfg.subcommand {
        Subcommand::Spectrum => spectrum(cfg, dir)?,
        Subcommand::Decay => decay(cfg, dir)?,
        Subcommand::Euler => euler(cfg, dir)?,
        Subcommand::Qg => qg(cfg, dir)?,
        Subcommand::Limit => limit(cfg, dir)?,
        Subcommand::Report => report(dir)?,
    };
    summary.metric("seed", cfg.experiment.seed);
    emit_report(dir, &summary)?;
    Ok(summary)
}

fn grid_of(cfg: &RunConfig) -> Result<Grid> {
    let g = &cfg.grid;
    Ok(make_grid(g.nx, g.ny, g.nz, g.length)?)
}

fn artifact(summary: &mut Summary, path: &Path) {
    if let Some(name) = path.file_name() {
        summary.artifacts.push(name.to_string_lossy().into_owned());
    }
}

/// White-noise field, cleaned of the modes the propagator does not evolve.
fn random_field(grid: Grid, parity: Parity, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(transform_forward(&ParityField::new(grid, parity, values)?))
}

/// Random smooth field: a few low Fourier modes in each direction under a
/// Gaussian envelope centred in the box.
fn random_smooth(grid: Grid, parity: Parity, rng: &mut ChaCha8Rng) -> Result<ParityField> {
    let terms: Vec<(f64, f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0..3) as f64,
            )
        })
        .collect();
    let c = 0.5 * grid.length;
    let width = 0.1 * grid.length;
    let f = move |x: f64, y: f64, z: f64| {
        let env = (-((x - c).powi(2) + (y - c).powi(2)) / (2.0 * width * width)).exp();
        let s: f64 = terms
            .iter()
            .map(|&(a, k1, k2, ph, kz)| {
                let vert = match parity {
                    Parity::Even => (kz * PI * z).cos(),
                    Parity::Odd => ((kz + 1.0) * PI * z).sin(),
                };
                a * (k1 * (x - c) / width + k2 * (y - c) / width + ph).cos() * vert
            })
            .sum();
        env * s
    };
    Ok(ParityField::from_fn(grid, parity, f))
}

fn spectrum(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("spectrum");
    let n = cfg.experiment.outputs.max(2);
    let path = dir.join("spectrum.csv");
    let mut csv = CsvSeries::create(&path, &SPECTRUM_HEADER)?;
    let (mut match_err, mut ident_err, mut ineq_fail, mut resid, mut basis_err) = (0.0f64, 0.0f64, 0usize, 0.0f64, 0.0f64);
    for i in 0..n {
        let xi2 = 0.1 + (16.0 - 0.1) * i as f64 / (n - 1) as f64;
        for kappa in 0..4 {
            let k = kappa as f64 * PI;
            for j in 1..=n {
                let omega = j as f64 / n as f64;
                let xi = [xi2.sqrt(), 0.0];
                let lam = eigenvalues_closed(xi2, k, omega);
                let a = assemble_mode_matrix(xi, k, omega);
                let mut closed = lam;
                closed.sort_by(|x, y| y.total_cmp(x));
                let oracle = eigenvalues_oracle(&a)?;
                for (c, o) in closed.iter().zip(&oracle) {
                    match_err = match_err.max((c - o).abs());
                }
                ident_err = ident_err
                    .max((lam[1] + lam[0]).abs())
                    .max((lam[3] + lam[2]).abs())
                    .max((lam[0] * lam[2] - omega * k.abs()).abs());
                let l1sq = lam[0] * lam[0];
                if l1sq < 0.5 * xi2 || l1sq - k * k < 0.5 * xi2 {
                    ineq_fail += 1;
                }
                let eig = eigenbasis(xi, k, omega)?;
                let (r, e) = (eig.residual(&a), eig.identity_error());
                resid = resid.max(r);
                basis_err = basis_err.max(e);
                let mut gap = f64::INFINITY;
                for p in 0..4 {
                    for q in p + 1..4 {
                        gap = gap.min((lam[p] - lam[q]).abs());
                    }
                }
                csv.row(&[xi2, k, omega, lam[0], lam[2], gap, r, e])?;
            }
        }
    }
    artifact(&mut summary, &csv.finish()?);
    summary.metric("eigen.max_oracle_mismatch", match_err);
    summary.metric("eigen.max_identity_error", ident_err);
    summary.metric("eigen.inequality_failures", ineq_fail);
    summary.metric("eigen.max_residual", resid);
    summary.metric("eigen.max_basis_error", basis_err);
    summary.criterion(
        "eigen_structure",
        match_err <= 1e-10 && ident_err <= 1e-12 && ineq_fail == 0,
        format!("oracle mismatch {match_err:.2e}, identities {ident_err:.2e}, inequality failures {ineq_fail}"),
    );

    let grid = grid_of(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
    let (mut drift, mut fixed, mut idem, mut annihil) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &eps in &cfg.regime.eps {
        let regime = ScalingRegime::new(eps, cfg.regime.m, cfg.regime.n, cfg.regime.alpha)?;
        let omega = regime.omega();
        let prop = WavePropagator::new(grid, omega)?;
        let raw = SpectralState4::new(
            random_field(grid, Parity::Even, &mut rng)?,
            [
                random_field(grid, Parity::Even, &mut rng)?,
                random_field(grid, Parity::Even, &mut rng)?,
                random_field(grid, Parity::Odd, &mut rng)?,
            ],
            omega,
        )?;
        let x0 = prop.evolve(&raw, 0.0)?;
        let n0 = x0.l2_norm_sq().sqrt();
        let t_end = cfg.experiment.horizon / regime.mach();
        for j in 1..=cfg.experiment.outputs {
            let t = t_end * j as f64 / cfg.experiment.outputs as f64;
            let y = prop.evolve(&x0, t)?;
            drift = drift.max((y.l2_norm_sq().sqrt() - n0).abs() / n0);
        }
        let (q, v) = kernel_project(&x0.s, &x0.v, omega)?;
        let kern = SpectralState4::new(q.clone(), v.clone(), omega)?;
        fixed = fixed.max(prop.evolve(&kern, t_end)?.max_diff(&kern));
        let (q2, v2) = kernel_project(&q, &v, omega)?;
        idem = idem.max(SpectralState4::new(q2, v2, omega)?.max_diff(&kern));
        annihil = annihil.max(apply_b(&kern)?.max_abs_coeff());
    }
    summary.metric("propagator.isometry_drift", drift);
    summary.metric("propagator.kernel_fixed", fixed);
    summary.metric("propagator.idempotence", idem);
    summary.metric("propagator.annihilation", annihil);
    summary.criterion(
        "propagator",
        drift < 1e-12 && fixed <= 1e-10 && idem <= 1e-11 && annihil <= 1e-10,
        format!("isometry {drift:.2e}, kernel fixed {fixed:.2e}, idempotence {idem:.2e}, B(Pu) {annihil:.2e}"),
    );
    Ok(summary)
}

/// Radii at which the oscillatory kernel is sampled in the van Corput sweep.
const VAN_CORPUT_RADII: [f64; 4] = [0.0, 1.0, 5.0, 20.0];

fn gaussian_2d(grid: Grid, sigma: f64) -> SpectralField {
    let c = 0.5 * grid.length;
    transform_forward(&ParityField::from_fn(grid, Parity::Even, |x, y, _| {
        (-((x - c).powi(2) + (y - c).powi(2)) / (2.0 * sigma * sigma)).exp()
    }))
}

fn write_sweep(csv: &mut CsvSeries, sweep: &DecaySweep) -> Result<()> {
    for r in &sweep.records {
        csv.row(&[r.t, r.p, r.k, r.omega, r.beta, r.norm, r.bound, r.ratio])?;
    }
    Ok(())
}

fn decay(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("decay");
    let [a, b] = cfg.experiment.cutoff;
    let psi = CutoffProfile::new(a, b)?;

    // van Corput constant and the slow-branch phase-derivative floor
    let mut c_star = 0.0f64;
    let mut floor_ok = true;
    let mut worst_floor = f64::INFINITY;
    for branch in [Branch::One, Branch::Three] {
        for k in [PI, 2.0 * PI] {
            for &omega in &cfg.experiment.omega {
                for e in 1..=4 {
                    let t = 10f64.powi(e);
                    for &r in &VAN_CORPUT_RADII {
                        let vc = van_corput_bound(&psi, k, omega, t, r, branch)?;
                        let i = oscillatory_kernel(t, r, k, omega, branch, &psi)?;
                        c_star = c_star.max(i.norm() / vc.bound);
                        if branch == Branch::Three && e == 1 && r == 0.0 {
                            // |lambda_3'| / omega >= |k| / (2 S^{3/2}) with S = omega^2 + b + k^2 <= 1 + b + k^2
                            let ratio = vc.lambda0 / omega;
                            let floor = k / (2.0 * (1.0 + b + k * k).powf(1.5));
                            worst_floor = worst_floor.min(ratio / floor);
                            floor_ok &= ratio >= floor;
                        }
                    }
                }
            }
        }
    }
    summary.metric("van_corput.c_star", c_star);
    summary.metric("van_corput.slow_floor_margin", worst_floor);
    summary.criterion(
        "van_corput",
        c_star <= 10.0 && floor_ok,
        format!("c* = {c_star:.3}, slow-branch Lambda0/omega over its floor >= {worst_floor:.3}"),
    );

    let grid = grid_of(cfg)?;
    let h = gaussian_2d(grid, 1.0);
    let times = log_times(1.0, cfg.experiment.horizon, cfg.experiment.outputs.max(1));
    let fit_factor = 10.0;
    let path = dir.join("decay.csv");
    let mut csv = CsvSeries::create(&path, &DECAY_HEADER)?;
    let slow_path = dir.join("decay_slow.csv");
    let mut slow = CsvSeries::create(&slow_path, &DECAY_HEADER)?;
    let (mut worst, mut l2_drift) = (0.0f64, 0.0f64);
    for &eps in &cfg.regime.eps {
        let regime = ScalingRegime::new(eps, cfg.regime.m, cfg.regime.n, cfg.regime.alpha)?;
        let base = DecayConfig {
            profile: psi,
            k: PI,
            omega: regime.omega(),
            branch: Branch::One,
            beta: 1.0 / cfg.regime.m,
            p: f64::INFINITY,
            times: times.clone(),
            fit_factor,
        };
        let sup = decay_sweep(&h, &base)?;
        let r = sup.worst_ratio_after_fit(fit_factor * times[0]);
        summary.metric(&format!("decay.worst_ratio@eps={eps}"), r);
        worst = worst.max(r);
        write_sweep(&mut csv, &sup)?;
        summary.warnings.extend(sup.warnings.iter().cloned());
        let l2 = decay_sweep(&h, &DecayConfig { p: 2.0, ..base.clone() })?;
        let n0 = l2.records[0].norm;
        for rec in &l2.records {
            l2_drift = l2_drift.max((rec.norm - n0).abs() / n0);
        }
        write_sweep(&mut csv, &l2)?;
        let s = decay_sweep(&h, &DecayConfig { branch: Branch::Three, ..base })?;
        summary.metric(&format!("decay.slow_branch_worst_ratio@eps={eps}"), s.worst_ratio_after_fit(fit_factor * times[0]));
        write_sweep(&mut slow, &s)?;
    }
    artifact(&mut summary, &csv.finish()?);
    artifact(&mut summary, &slow.finish()?);
    summary.metric("decay.l2_drift", l2_drift);
    summary.criterion(
        "dispersive_decay",
        worst <= 1.0 && l2_drift <= 1e-12,
        format!("worst sup-norm ratio after the fit {worst:.3}, L2 drift {l2_drift:.2e}"),
    );
    Ok(summary)
}

/// Gaussian vortex dipole in the centre of a horizontal box, with its
/// round-off mean removed so that it is a valid vorticity.
pub fn dipole(grid: Grid) -> SpectralField {
    let c = 0.5 * grid.length;
    let mut z = transform_forward(&ParityField::from_fn(grid, Parity::Even, |x, y, _| {
        let a = (-((x - c - 0.6).powi(2) + (y - c).powi(2)) / 0.3).exp();
        let b = (-((x - c + 0.6).powi(2) + (y - c).powi(2)) / 0.3).exp();
        4.0 * (a - b)
    }));
    z.set(0, 0, 0, 0.0.into());
    z
}

fn qg_options(cfg: &RunConfig) -> QgOptions {
    QgOptions { cfl: 0.4 * cfg.experiment.cfl.min(1.0), record_every: usize::MAX, ..QgOptions::default() }
}

/// Integrates to the horizon in `outputs` equal segments, one row each.
fn qg_series(cfg: &RunConfig, state: &QgState) -> Result<Vec<QgRecord>> {
    let opts = qg_options(cfg);
    let n = cfg.experiment.outputs.max(1);
    let mut s = state.clone();
    let mut rows = Vec::new();
    for j in 1..=n {
        let t_end = cfg.experiment.horizon * j as f64 / n as f64;
        let (next, recs) = integrate_qg(&s, t_end, &opts)?;
        if rows.is_empty() {
            rows.push(recs[0]);
        }
        rows.push(*recs.last().expect("integrate_qg records the final time"));
        s = next;
    }
    Ok(rows)
}

fn write_series(dir: &Path, name: &str, rows: &[QgRecord], summary: &mut Summary) -> Result<()> {
    let mut csv = CsvSeries::create(&dir.join(name), &SERIES_HEADER)?;
    for r in rows {
        csv.row(&[r.t, r.energy, r.enstrophy, r.maxvort])?;
    }
    artifact(summary, &csv.finish()?);
    Ok(())
}

fn rel_drift(rows: &[QgRecord], f: impl Fn(&QgRecord) -> f64) -> f64 {
    let v0 = f(&rows[0]);
    rows.iter().map(|r| (f(r) - v0).abs() / v0.abs()).fold(0.0, f64::max)
}

/// Observed RK4 order from steps `dt` and `dt/2` against a reference at `dt/16`.
pub fn rk4_order(state: &QgState, t_end: f64, coarse_steps: usize) -> Result<f64> {
    let run = |n: usize| -> Result<QgState> {
        let dt = t_end / n as f64;
        let mut s = state.clone();
        for _ in 0..n {
            s = qg_step(&s, dt)?;
        }
        Ok(s)
    };
    let reference = run(16 * coarse_steps)?;
    let e1 = run(coarse_steps)?.pi.max_diff(&reference.pi);
    let e2 = run(2 * coarse_steps)?.pi.max_diff(&reference.pi);
    Ok((e1 / e2).log2())
}

fn euler(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("euler");
    let grid = grid_of(cfg)?;
    let zeta = Vorticity2D::new(dipole(grid))?;
    let rows = qg_series(cfg, &zeta.as_qg())?;
    write_series(dir, "euler.csv", &rows, &mut summary)?;
    let z_rate = rel_drift(&rows, |r| r.enstrophy) / cfg.experiment.horizon;
    let e_drift = rel_drift(&rows, |r| r.energy);
    summary.metric("enstrophy_drift_per_unit_time", z_rate);
    summary.metric("energy_drift", e_drift);
    let order = rk4_order(&zeta.as_qg(), 0.2, 20)?;
    summary.metric("rk4_order", order);
    summary.criterion("enstrophy", z_rate <= 1e-8, format!("relative enstrophy drift {z_rate:.2e} per unit time"));
    summary.criterion("rk4_order", order >= 3.7, format!("observed order {order:.3}"));
    Ok(summary)
}

fn qg(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("qg");
    let grid = grid_of(cfg)?;
    let mut worst = 0.0f64;
    for (i, &omega) in cfg.experiment.omega.iter().enumerate() {
        let pi = dipole(grid);
        let state = if omega == 0.0 { Vorticity2D::new(pi)?.as_qg() } else { QgState::new(pi, omega)? };
        let rows = qg_series(cfg, &state)?;
        let name = if cfg.experiment.omega.len() == 1 { "qg.csv".to_string() } else { format!("qg_{i}.csv") };
        write_series(dir, &name, &rows, &mut summary)?;
        let drift = rel_drift(&rows, |r| r.energy);
        summary.metric(&format!("energy_drift@omega={omega}"), drift);
        worst = worst.max(drift);
    }
    summary.criterion("energy", worst <= 1e-6, format!("worst relative energy drift {worst:.2e}"));

    // omega = 0 against the Euler stepper, step by step
    let zeta = Vorticity2D::new(dipole(grid))?;
    let (mut a, mut b) = (zeta.as_qg(), zeta.clone());
    let dt = 0.01;
    let mut reduction = 0.0f64;
    for _ in 0..10 {
        a = qg_step(&a, dt)?;
        b = euler_step(&b, dt)?;
        reduction = reduction.max(a.pi.max_diff(&b.zeta) / b.zeta.max_abs_coeff());
    }
    summary.metric("euler_reduction", reduction);
    summary.criterion("euler_reduction", reduction <= 1e-13, format!("largest per-step difference {reduction:.2e}"));
    let order = rk4_order(&QgState::new(dipole(grid), cfg.experiment.omega[0])?, 0.2, 20)?;
    summary.metric("rk4_order", order);
    summary.criterion("rk4_order", order >= 3.7, format!("observed order {order:.3}"));
    Ok(summary)
}

/// The ill-prepared data used by the `limit` experiment: a Gaussian density
/// bump with a vertical cosine profile, a sheared vortex plus a weak
/// divergent part, and a small vertical velocity.
pub fn limit_initial_data(grid: Grid) -> (ParityField, [ParityField; 3]) {
    let c = 0.5 * grid.length;
    let s2 = 18.0;
    let f = move |x: f64, y: f64| (-((x - c).powi(2) + (y - c).powi(2)) / s2).exp();
    let rho1 = ParityField::from_fn(grid, Parity::Even, |x, y, z| f(x, y) * (1.0 + 0.5 * (PI * z).cos()));
    let u0 = [
        ParityField::from_fn(grid, Parity::Even, |x, y, z| {
            (3.0 * (y - c) * 2.0 / s2 * (1.0 + 0.3 * (PI * z).cos()) - 0.2 * (x - c) * 2.0 / s2) * f(x, y)
        }),
        ParityField::from_fn(grid, Parity::Even, |x, y, z| {
            (-3.0 * (x - c) * 2.0 / s2 * (1.0 + 0.3 * (PI * z).cos()) - 0.2 * (y - c) * 2.0 / s2) * f(x, y)
        }),
        ParityField::from_fn(grid, Parity::Odd, |x, y, z| 0.2 * (PI * z).sin() * f(x, y)),
    ];
    (rho1, u0)
}

/// Static-state check: exact profile for `gamma = 2` and the fitted
/// `eps`-exponent of `sup |rho~ - 1|` for `gamma = 5/3`.
pub fn static_state_checks(m: f64, n: f64, alpha: f64) -> Result<(f64, f64)> {
    let grid = make_grid(4, 4, 17, 1.0)?;
    let eps_list = [0.4, 0.3, 0.2, 0.1, 0.05];
    let mut exact_err = 0.0f64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &eps in &eps_list {
        let regime = ScalingRegime::new(eps, m, n, alpha)?;
        let c = eps.powf(2.0 * (m - n));
        let two = static_state(&regime, &EquationOfState { gamma: 2.0 }, grid)?;
        for (idx, v) in two.values.iter().enumerate() {
            let z = grid.z(idx / grid.plane_len());
            exact_err = exact_err.max((v - (1.0 - c * z)).abs());
        }
        let poly = static_state(&regime, &EquationOfState { gamma: 5.0 / 3.0 }, grid)?;
        let dev = poly.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        xs.push(eps.ln());
        ys.push(dev.ln());
    }
    Ok((exact_err, least_squares_slope(&xs, &ys)))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Reassembly, orthogonality and Pythagoras errors of the initial-data
/// decomposition on seeded random data.
pub fn decomposition_checks(grid: Grid, regime: &ScalingRegime, delta: f64, seed: u64) -> Result<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho1 = random_smooth(grid, Parity::Even, &mut rng)?;
    let u0 = [
        random_smooth(grid, VELOCITY_PARITY[0], &mut rng)?,
        random_smooth(grid, VELOCITY_PARITY[1], &mut rng)?,
        random_smooth(grid, VELOCITY_PARITY[2], &mut rng)?,
    ];
    let dec = decompose_initial_data(&rho1, &u0, regime, delta)?;
    let bal = dec.balanced()?;
    let full = SpectralState4::new(dec.rho_delta.clone(), dec.u_delta.clone(), regime.omega())?;
    let reassembly = dec.wave.add(&bal)?.max_diff(&full);
    let norm = full.l2_norm_sq();
    let orth = dec.wave.inner(&bal)?.abs() / norm;
    let pyth = (norm - dec.wave.l2_norm_sq() - bal.l2_norm_sq()).abs() / norm;
    Ok([reassembly, orth, pyth])
}

fn limit_config(cfg: &RunConfig, grid: Grid, regime: ScalingRegime, delta: f64) -> LimitConfig {
    LimitConfig {
        grid,
        regime,
        eos: cfg.eos(),
        forces: ForceFlags::default(),
        viscosity: Viscosity::default(),
        delta,
        tau: cfg.experiment.horizon,
        outputs: cfg.experiment.outputs,
        cfl_fraction: cfg.experiment.cfl,
        local_radius: grid.length / (2.0 * PI),
    }
}

/// Whether `values` strictly decrease along runs ordered by decreasing `eps`.
fn strictly_decreasing(runs: &[&LimitRun], f: impl Fn(&LimitRun) -> f64) -> bool {
    runs.windows(2).all(|w| f(w[1]) < f(w[0]))
}

fn limit(cfg: &RunConfig, dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("limit");
    let (m, n, alpha) = (cfg.regime.m, cfg.regime.n, cfg.regime.alpha);

    let (exact, slope) = static_state_checks(m, n, alpha)?;
    let target = 2.0 * (m - n);
    summary.metric("static.exact_error", exact);
    summary.metric("static.fitted_exponent", slope);
    summary.criterion(
        "static_state",
        exact <= 1e-14 && (slope - target).abs() <= 0.05,
        format!("gamma = 2 error {exact:.2e}, gamma = 5/3 exponent {slope:.4} against {target}"),
    );

    let grid = grid_of(cfg)?;
    let first = ScalingRegime::new(cfg.regime.eps[0], m, n, alpha)?;
    let [re, orth, pyth] = decomposition_checks(grid, &first, cfg.experiment.delta[0], cfg.experiment.seed)?;
    summary.metric("decomposition.reassembly", re);
    summary.metric("decomposition.orthogonality", orth);
    summary.metric("decomposition.pythagoras", pyth);
    summary.criterion(
        "decomposition",
        re <= 1e-12 && orth <= 1e-10 && pyth <= 1e-10,
        format!("reassembly {re:.2e}, orthogonality {orth:.2e}, Pythagoras {pyth:.2e}"),
    );

    let (rho1, u0) = limit_initial_data(grid);
    let path = dir.join("limit.csv");
    let mut csv = CsvSeries::create(&path, &LIMIT_HEADER)?;
    let budget_path = dir.join("budget.csv");
    let mut budget = CsvSeries::create(&budget_path, &BUDGET_HEADER)?;
    let multi_delta = cfg.experiment.delta.len() > 1;
    for &delta in &cfg.experiment.delta {
        let tag = if multi_delta { format!("@delta={delta}") } else { String::new() };
        let mut runs = Vec::new();
        for &eps in &cfg.regime.eps {
            let regime = ScalingRegime::new(eps, m, n, alpha)?;
            let run = run_limit(&limit_config(cfg, grid, regime, delta), &rho1, &u0)?;
            for r in &run.records {
                csv.row(&[r.t, r.eps, r.delta, r.eeps, r.energy, r.mass, r.dens_dev])?;
                let i = &r.integrated;
                budget.row(&[
                    r.t,
                    r.eps,
                    r.delta,
                    r.slack,
                    i.dissipation,
                    i.transport,
                    i.viscous,
                    i.coriolis,
                    i.pressure_potential,
                    i.pressure_divergence,
                    i.gravity,
                ])?;
            }
            let key = format!("eps={eps}{tag}");
            summary.metric(&format!("steps@{key}"), run.steps);
            summary.metric(&format!("initial_energy@{key}"), run.initial_energy);
            summary.metric(&format!("final_relative_entropy@{key}"), run.final_entropy());
            summary.metric(&format!("local_momentum_error@{key}"), run.local_momentum_error);
            summary.metric(&format!("worst_slack_ratio@{key}"), run.worst_slack_ratio());
            summary.metric(&format!("density_deviation@{key}"), run.bounds.density_deviation);
            summary.warnings.extend(run.warnings.iter().map(|w| format!("{key}: {w}")));
            runs.push(run);
        }
        let samples: Vec<_> = runs.iter().map(|r| r.bounds.clone()).collect();
        match uniform_bounds_report(&samples) {
            Ok(rep) => {
                summary.metric(&format!("density_exponent{tag}"), rep.density_exponent);
                summary.metric(&format!("kinetic_spread{tag}"), rep.kinetic_spread);
                summary.criterion(
                    &format!("singular_limit.density_rate{tag}"),
                    rep.density_exponent >= m - 0.2,
                    format!("fitted exponent {:.3} against {}", rep.density_exponent, m - 0.2),
                );
            }
            Err(_) => {
                summary.metric(&format!("density_exponent{tag}"), "insufficient data");
                summary.warnings.push(format!("exponent fit{tag}: insufficient data (needs three distinct eps)"));
            }
        }
        let mut ordered: Vec<&LimitRun> = runs.iter().collect();
        ordered.sort_by(|a, b| b.config.regime.eps.total_cmp(&a.config.regime.eps));
        if ordered.len() >= 2 {
            summary.criterion(
                &format!("singular_limit.relative_entropy{tag}"),
                strictly_decreasing(&ordered, |r| r.final_entropy()),
                format!("{:?}", ordered.iter().map(|r| r.final_entropy()).collect::<Vec<_>>()),
            );
            summary.criterion(
                &format!("singular_limit.local_momentum{tag}"),
                strictly_decreasing(&ordered, |r| r.local_momentum_error),
                format!("{:?}", ordered.iter().map(|r| r.local_momentum_error).collect::<Vec<_>>()),
            );
        } else {
            summary.warnings.push(format!("monotonicity in eps{tag}: insufficient data (needs two eps)"));
        }
        let worst = runs.iter().map(|r| r.worst_slack_ratio()).fold(f64::INFINITY, f64::min);
        summary.criterion(
            &format!("singular_limit.slack{tag}"),
            worst >= -1e-6,
            format!("worst slack / E(0) = {worst:.3e}"),
        );
    }
    artifact(&mut summary, &csv.finish()?);
    artifact(&mut summary, &budget.finish()?);
    Ok(summary)
}

/// Merges the `summary.json` files found in the sibling directories of `dir`.
fn report(dir: &Path) -> Result<Summary> {
    let mut summary = Summary::for_subcommand("report");
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let own = dir.file_name();
    let mut found: Vec<PathBuf> = match fs::read_dir(parent) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter(|e| Some(e.file_name().as_os_str()) != own)
            .map(|e| e.path().join("summary.json"))
            .filter(|p| p.is_file())
            .collect(),
        Err(_) => Vec::new(),
    };
    found.sort();
    for path in found {
        let text = fs::read_to_string(&path)
            .map_err(|e| ExperimentError::Report { path: path.clone(), message: e.to_string() })?;
        let other: Summary = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Report { path: path.clone(), message: e.to_string() })?;
        summary.merge(&other);
    }
    Ok(summary)
}
