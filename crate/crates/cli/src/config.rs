//! Run configuration: defaults, config file, command-line flags.
//!
//! Precedence is flags over config file over defaults; the fully resolved
//! set is echoed into every output artifact so a result file always records
//! how it was produced.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use kzfcs::counting::Pairing;
use kzfcs::dynamics::{Method, SolverConfig};
use kzfcs::ising::{ChainParams, QuenchProtocol};

/// Environment variable providing the default cache directory.
pub const CACHE_DIR_ENV: &str = "KZFCS_CACHE_DIR";

/// Flags shared by every subcommand.
#[derive(Debug, Args, Clone, Default)]
pub struct CommonOpts {
    /// Number of spins N (even).
    #[arg(long)]
    pub n: Option<usize>,

    /// Ferromagnetic coupling J.
    #[arg(long)]
    pub j: Option<f64>,

    /// Reduced Planck constant.
    #[arg(long)]
    pub hbar: Option<f64>,

    /// Quench time τ_Q.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Log-spaced quench-time grid, lo:hi:points.
    #[arg(long = "tau-grid", value_name = "LO:HI:POINTS")]
    pub tau_grid: Option<String>,

    /// Excitation probabilities: "lz" or "ode".
    #[arg(long)]
    pub method: Option<String>,

    /// Mode pairing: "independent" or "paired".
    #[arg(long)]
    pub pairing: Option<String>,

    /// Highest cumulant order.
    #[arg(long)]
    pub qmax: Option<usize>,

    /// Absolute solver tolerance.
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,

    /// Relative solver tolerance.
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,

    /// Ramp start factor a (start time is -a τ_Q).
    #[arg(long = "start-factor")]
    pub start_factor: Option<f64>,

    /// Output file path.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Sweep row cache directory (default: $KZFCS_CACHE_DIR or ./kzfcs-cache).
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,

    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Entries accepted in the JSON config file. Unknown keys are rejected.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    j: Option<f64>,
    hbar: Option<f64>,
    tau: Option<f64>,
    tau_grid: Option<String>,
    method: Option<String>,
    pairing: Option<String>,
    qmax: Option<usize>,
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    start_factor: Option<f64>,
    out: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub j: f64,
    pub hbar: f64,
    pub tau: Option<f64>,
    pub tau_grid: Option<(f64, f64, usize)>,
    pub method: Method,
    pub pairing: Pairing,
    pub qmax: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub start_factor: f64,
    pub out: Option<PathBuf>,
    pub cache_dir: PathBuf,
}

pub fn parse_tau_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("tau grid must be lo:hi:points, got {text:?}");
    }
    let lo: f64 = parts[0]
        .parse()
        .with_context(|| format!("invalid grid lower edge {:?}", parts[0]))?;
    let hi: f64 = parts[1]
        .parse()
        .with_context(|| format!("invalid grid upper edge {:?}", parts[1]))?;
    let points: usize = parts[2]
        .parse()
        .with_context(|| format!("invalid point count {:?}", parts[2]))?;
    Ok((lo, hi, points))
}

pub fn parse_tau_range(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        bail!("tau range must be lo:hi, got {text:?}");
    }
    Ok((
        parts[0]
            .parse()
            .with_context(|| format!("invalid range lower edge {:?}", parts[0]))?,
        parts[1]
            .parse()
            .with_context(|| format!("invalid range upper edge {:?}", parts[1]))?,
    ))
}

impl RunConfig {
    /// Apply precedence: defaults, then the config file, then flags.
    pub fn resolve(opts: &CommonOpts, default_qmax: usize) -> Result<Self> {
        let file: FileConfig = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("cannot parse config file {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let method_str = opts
            .method
            .clone()
            .or(file.method)
            .unwrap_or_else(|| "lz".to_string());
        let pairing_str = opts
            .pairing
            .clone()
            .or(file.pairing)
            .unwrap_or_else(|| "independent".to_string());
        let tau_grid = match opts.tau_grid.clone().or(file.tau_grid) {
            Some(text) => Some(parse_tau_grid(&text)?),
            None => None,
        };
        let cache_dir = opts
            .cache_dir
            .clone()
            .or(file.cache_dir)
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("kzfcs-cache"));

        let config = Self {
            n: opts.n.or(file.n).unwrap_or(400),
            j: opts.j.or(file.j).unwrap_or(1.0),
            hbar: opts.hbar.or(file.hbar).unwrap_or(1.0),
            tau: opts.tau.or(file.tau),
            tau_grid,
            method: Method::from_str(&method_str)?,
            pairing: Pairing::from_str(&pairing_str)?,
            qmax: opts.qmax.or(file.qmax).unwrap_or(default_qmax),
            abs_tol: opts.abs_tol.or(file.abs_tol).unwrap_or(1e-10),
            rel_tol: opts.rel_tol.or(file.rel_tol).unwrap_or(1e-10),
            start_factor: opts.start_factor.or(file.start_factor).unwrap_or(1.0),
            out: opts.out.clone().or(file.out),
            cache_dir,
        };
        // Validate eagerly so commands can assume a consistent state.
        config.chain()?;
        config.solver().validate().map_err(anyhow::Error::from)?;
        Ok(config)
    }

    pub fn chain(&self) -> Result<ChainParams> {
        Ok(ChainParams::new(self.n, self.j, self.hbar)?)
    }

    pub fn protocol(&self) -> Result<QuenchProtocol> {
        let tau = self.tau.context("a quench time is required (--tau)")?;
        Ok(QuenchProtocol::with_start_factor(tau, self.start_factor)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            ..SolverConfig::default()
        }
    }

    pub fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    /// Reproducibility header: artifact version plus every resolved value.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("kzfcs {}", env!("CARGO_PKG_VERSION"))];
        lines.push(format!("n = {}", self.n));
        lines.push(format!("j = {:.16e}", self.j));
        lines.push(format!("hbar = {:.16e}", self.hbar));
        match self.tau {
            Some(tau) => lines.push(format!("tau = {tau:.16e}")),
            None => lines.push("tau = none".into()),
        }
        match self.tau_grid {
            Some((lo, hi, points)) => {
                lines.push(format!("tau_grid = {lo:.16e}:{hi:.16e}:{points}"))
            }
            None => lines.push("tau_grid = none".into()),
        }
        lines.push(format!("method = {}", self.method));
        lines.push(format!("pairing = {}", self.pairing));
        lines.push(format!("qmax = {}", self.qmax));
        lines.push(format!("abs_tol = {:.16e}", self.abs_tol));
        lines.push(format!("rel_tol = {:.16e}", self.rel_tol));
        lines.push(format!("start_factor = {:.16e}", self.start_factor));
        lines
    }

    /// The same resolved set as a JSON object for sidecar files.
    pub fn echo_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "n": self.n,
            "j": self.j,
            "hbar": self.hbar,
            "tau": self.tau,
            "tau_grid": self.tau_grid.map(|(lo, hi, points)| {
                serde_json::json!({"lo": lo, "hi": hi, "points": points})
            }),
            "method": self.method.to_string(),
            "pairing": self.pairing.to_string(),
            "qmax": self.qmax,
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "start_factor": self.start_factor,
        })
    }
}

/// Write a file atomically: staged in a sibling temp file, then renamed.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory {}", parent.display()))?;
        }
    }
    let mut tmp = path.to_path_buf();
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".tmp");
    tmp.set_file_name(name);
    std::fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot rename {} to {}", tmp.display(), path.display()))?;
    Ok(())
}
