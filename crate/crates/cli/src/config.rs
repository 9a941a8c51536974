//! Experiment configuration: a TOML file with a top-level `subcommand` and
//! the sections `[grid]`, `[regime]`, `[experiment]` and `[output]`. Every
//! key is optional; missing keys take per-subcommand defaults.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use rossbylab::compressible::{validate_exponents, EquationOfState};
use rossbylab::spectral::make_grid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Spectrum,
    Decay,
    Euler,
    Qg,
    Limit,
    Report,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Decay => "decay",
            Subcommand::Euler => "euler",
            Subcommand::Qg => "qg",
            Subcommand::Limit => "limit",
            Subcommand::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub eps: Vec<f64>,
    pub m: f64,
    pub n: f64,
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Smoothing parameters of the limit runs.
    pub delta: Vec<f64>,
    /// Support `[a, b]` of the radial frequency cut-off in `|xi|^2`.
    pub cutoff: [f64; 2],
    /// Final time.
    pub horizon: f64,
    /// Rotation parameters for the spectrum and QG runs.
    pub omega: Vec<f64>,
    /// Output intervals (limit) or samples per decade (decay).
    pub outputs: usize,
    /// Fraction of the CFL step.
    pub cfl: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

/// A validated configuration with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub grid: GridConfig,
    pub regime: RegimeConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Option<usize>,
    ny: Option<usize>,
    nz: Option<usize>,
    length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegime {
    eps: Option<Vec<f64>>,
    m: Option<f64>,
    n: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    delta: Option<Vec<f64>>,
    cutoff: Option<[f64; 2]>,
    horizon: Option<f64>,
    omega: Option<Vec<f64>>,
    outputs: Option<usize>,
    cfl: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    subcommand: Subcommand,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    regime: RawRegime,
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    output: RawOutput,
}

impl RunConfig {
    /// All defaults for a subcommand.
    pub fn defaults(sub: Subcommand) -> RunConfig {
        let (grid, eps, horizon, omega, outputs) = match sub {
            Subcommand::Spectrum => ((64, 64, 8, 16.0 * PI), vec![0.4, 0.3, 0.2], 100.0, vec![1.0, 0.3, 0.1, 0.03], 10),
            Subcommand::Decay => ((128, 128, 1, 32.0 * PI), vec![0.3, 0.2, 0.1], 100.0, vec![1.0, 0.3, 0.1, 0.03], 6),
            Subcommand::Euler => ((128, 128, 1, 2.0 * PI), vec![0.4], 1.0, vec![0.0], 20),
            Subcommand::Qg => ((128, 128, 1, 2.0 * PI), vec![0.4], 1.0, vec![0.5], 20),
            Subcommand::Limit | Subcommand::Report => ((64, 64, 8, 16.0 * PI), vec![0.4, 0.3, 0.2], 0.5, vec![0.5], 10),
        };
        RunConfig {
            subcommand: sub,
            grid: GridConfig { nx: grid.0, ny: grid.1, nz: grid.2, length: grid.3 },
            regime: RegimeConfig { eps, m: 3.0, n: 1.0, alpha: 1.0, gamma: 2.0 },
            experiment: ExperimentConfig {
                delta: vec![0.1],
                cutoff: [1.0, 4.0],
                horizon,
                omega,
                outputs,
                cfl: 1.0,
                seed: 0,
            },
            output: OutputConfig { dir: PathBuf::from("rossbylab-out").join(sub.to_string()) },
        }
    }

    /// The normalised TOML form; parsing it gives back the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn eos(&self) -> EquationOfState {
        EquationOfState { gamma: self.regime.gamma }
    }
}

/// Line (1-based) of `key = ...` inside `[section]`, or of the section
/// header when the key is absent.
fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    let mut header = 0;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = i + 1;
            }
            continue;
        }
        let top = section.is_empty() && current.is_empty();
        if (current == section || top) && t.split('=').next().map(str::trim) == Some(key) {
            return i + 1;
        }
    }
    header
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let mut cfg = RunConfig::defaults(raw.subcommand);
    let g = raw.grid;
    cfg.grid.nx = g.nx.unwrap_or(cfg.grid.nx);
    cfg.grid.ny = g.ny.unwrap_or(cfg.grid.ny);
    cfg.grid.nz = g.nz.unwrap_or(cfg.grid.nz);
    cfg.grid.length = g.length.unwrap_or(cfg.grid.length);
    let r = raw.regime;
    cfg.regime.eps = r.eps.unwrap_or(cfg.regime.eps);
    cfg.regime.m = r.m.unwrap_or(cfg.regime.m);
    cfg.regime.n = r.n.unwrap_or(cfg.regime.n);
    cfg.regime.alpha = r.alpha.unwrap_or(cfg.regime.alpha);
    cfg.regime.gamma = r.gamma.unwrap_or(cfg.regime.gamma);
    let e = raw.experiment;
    cfg.experiment.delta = e.delta.unwrap_or(cfg.experiment.delta);
    cfg.experiment.cutoff = e.cutoff.unwrap_or(cfg.experiment.cutoff);
    cfg.experiment.horizon = e.horizon.unwrap_or(cfg.experiment.horizon);
    cfg.experiment.omega = e.omega.unwrap_or(cfg.experiment.omega);
    cfg.experiment.outputs = e.outputs.unwrap_or(cfg.experiment.outputs);
    cfg.experiment.cfl = e.cfl.unwrap_or(cfg.experiment.cfl);
    cfg.experiment.seed = e.seed.unwrap_or(cfg.experiment.seed);
    if let Some(dir) = raw.output.dir {
        cfg.output.dir = dir;
    }
    validate(&cfg, text)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

fn validate(cfg: &RunConfig, text: &str) -> Result<(), ConfigError> {
    let fail = |section: &str, key: &str, message: String| ConfigError::Invalid { line: locate(text, section, key), message };
    let r = &cfg.regime;
    if let Err(e) = validate_exponents(r.m, r.n, r.alpha) {
        let key = if r.alpha > 0.0 { if r.n >= 1.0 { "m" } else { "n" } } else { "alpha" };
        return Err(fail("regime", key, e.to_string()));
    }
    if r.eps.is_empty() || r.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(fail("regime", "eps", format!("eps must be a nonempty list in (0, 1], got {:?}", r.eps)));
    }
    if let Err(e) = EquationOfState::new(r.gamma) {
        return Err(fail("regime", "gamma", e.to_string()));
    }
    let g = &cfg.grid;
    if let Err(e) = make_grid(g.nx, g.ny, g.nz, g.length) {
        return Err(fail("grid", "nx", e.to_string()));
    }
    let x = &cfg.experiment;
    if x.delta.is_empty() || x.delta.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
        return Err(fail("experiment", "delta", format!("delta must be a nonempty list in (0, 1), got {:?}", x.delta)));
    }
    let [a, b] = x.cutoff;
    if !(a > 0.0 && b > a) {
        return Err(fail("experiment", "cutoff", format!("cutoff needs 0 < a < b, got [{a}, {b}]")));
    }
    if !(x.horizon > 0.0 && x.horizon.is_finite()) {
        return Err(fail("experiment", "horizon", format!("horizon must be positive, got {}", x.horizon)));
    }
    if x.omega.is_empty() || x.omega.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(fail("experiment", "omega", format!("omega must be a nonempty list of values >= 0, got {:?}", x.omega)));
    }
    if x.outputs == 0 {
        return Err(fail("experiment", "outputs", "outputs must be at least 1".into()));
    }
    if !(x.cfl > 0.0 && x.cfl <= 1.0) {
        return Err(fail("experiment", "cfl", format!("cfl must lie in (0, 1], got {}", x.cfl)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = parse_config("subcommand = \"limit\"\n").unwrap();
        assert_eq!(cfg, RunConfig::defaults(Subcommand::Limit));
    }

    #[test]
    fn regime_rule_is_enforced_with_line_number() {
        let text = "subcommand = \"limit\"\n\n[regime]\neps = [0.3]\nm = 2.0\nn = 1.0\n";
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 5:"), "{msg}");
        assert!(msg.contains("m/2 > n >= 1"), "{msg}");
    }

    #[test]
    fn round_trip_is_stable() {
        let text = "subcommand = \"decay\"\n[grid]\nnx = 32\n[regime]\neps = [0.5, 0.25]\n[experiment]\ncutoff = [0.5, 2.0]\nseed = 9\n[output]\ndir = \"x/y\"\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn syntax_and_unknown_keys_report_lines() {
        let err = parse_config("subcommand = \"qg\"\n[grid]\nnx = = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_config("subcommand = \"qg\"\n[grid]\nwidth = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn bad_lists_are_rejected() {
        assert!(parse_config("subcommand = \"limit\"\n[regime]\neps = []\n").is_err());
        assert!(parse_config("subcommand = \"limit\"\n[experiment]\ndelta = [1.5]\n").is_err());
        assert!(parse_config("subcommand = \"limit\"\n[grid]\nnx = 48\n").is_err());
    }
}
