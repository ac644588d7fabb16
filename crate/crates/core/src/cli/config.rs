//! Flag parsing and config-file merging. Precedence: flags, then the config
//! file, then built-in defaults.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::state::{StateParams, DEFAULT_TOL_NORM};
use crate::wigner::GridSpec;

#[derive(Debug, Parser)]
#[command(
    name = "pbphase",
    version,
    about = "Phase distributions, phase statistics and Wigner functions of superposed squeezed displaced number states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fock-basis coefficients C_m (columns m, re_c, im_c, prob)
    Coeffs(CommonArgs),
    /// Continuum phase distribution P(theta)
    PhaseDist(CommonArgs),
    /// Phase and photon-number statistics, squeezing parameters
    Stats(CommonArgs),
    /// Wigner function on a rectangular grid (long form x, y, w)
    Wigner(CommonArgs),
    /// Statistics swept over alpha or r
    Sweep(SweepArgs),
    /// Data sets for the figure presets.
    ///
    /// fig1a/fig1b: Wigner grid, n=1, alpha=1, eps=+1/-1, r=0.
    /// fig2a: P(theta), alpha=2, eps=1, n in {1,2}.
    /// fig2b: P(theta), alpha=1, n=1, eps in {0,1,-1}.
    /// fig3a-d: P(theta) for (eps, alpha, n) = (0,1,2), (1,1,2), (-1,1,2), (1,2,2);
    /// r is swept over the preset constant {0, 0.25, 0.5, 0.75, 1.0}.
    /// fig4a: phase variance against alpha in [0, 5] for (eps, n) in {(0,3), (1,1), (1,3), (-1,3)}, r=0.
    /// fig4b: S_N and S_theta against alpha in [0, 5], theta0 = -pi.
    #[command(verbatim_doc_comment)]
    Figure(FigureArgs),
    /// Oracle and invariant suite over the standard parameter lattice
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `auto` or a fixed Fock cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    Auto,
    Fixed(usize),
}

impl FromStr for Cutoff {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Cutoff::Auto);
        }
        s.parse()
            .map(Cutoff::Fixed)
            .map_err(|_| format!("expected `auto` or a non-negative integer, got `{s}`"))
    }
}

/// `lo,hi` or `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "Vec<f64>")]
pub struct Range(pub f64, pub f64);

impl TryFrom<Vec<f64>> for Range {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, String> {
        match v[..] {
            [lo, hi] if lo < hi => Ok(Range(lo, hi)),
            _ => Err(format!("range must be [lo, hi] with lo < hi, got {v:?}")),
        }
    }
}

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split([',', ':']).collect();
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        match nums {
            Ok(v) => Range::try_from(v),
            Err(_) => Err(format!("expected `lo,hi`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Fock index of the seed state
    #[arg(long)]
    pub n: Option<usize>,
    /// Displacement (real)
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Squeeze parameter (>= 0)
    #[arg(long)]
    pub r: Option<f64>,
    /// Superposition weight (real; negative means phase pi)
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Extra phase of eps in radians (normalization and Wigner paths only)
    #[arg(long = "eps-phase", allow_hyphen_values = true)]
    pub eps_phase: Option<f64>,
    /// Phase window start
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    /// Phase grid points
    #[arg(long)]
    pub points: Option<usize>,
    /// Wigner x range `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub xrange: Option<Range>,
    /// Wigner y range `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub yrange: Option<Range>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Fock cutoff: `auto` or an integer
    #[arg(long)]
    pub cutoff: Option<Cutoff>,
    /// Truncation tolerance on the discarded probability
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: $PBPHASE_OUT_DIR/<name> or stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config file with `key = value` lines (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Alpha,
    R,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Parameter to sweep
    #[arg(long, value_enum)]
    pub param: Option<SweepParam>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated statistics: variance, variance_closed, mean_phase,
    /// n_mean, n_variance, commutator, s_number, s_phase
    #[arg(long, value_delimiter = ',')]
    pub stats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4a,
    Fig4b,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub preset: Preset,
    /// Output directory (default: $PBPHASE_OUT_DIR or the current directory)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeSize {
    Full,
    Small,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Oracle quadrature tolerance; a lattice point passes when max|ΔC_m| < 10·tol
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Tolerance of the Σ|C_m|² = 1 check
    #[arg(long = "norm-tol", default_value_t = 1e-9)]
    pub norm_tol: f64,
    #[arg(long = "lattice-size", value_enum, default_value_t = LatticeSize::Full)]
    pub lattice_size: LatticeSize,
    /// Report file (default: $PBPHASE_OUT_DIR/verify_report.csv or stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub eps: Option<f64>,
    #[serde(alias = "eps-phase")]
    pub eps_phase: Option<f64>,
    pub theta0: Option<f64>,
    pub points: Option<usize>,
    pub xrange: Option<Range>,
    pub yrange: Option<Range>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cutoff: Option<toml::Value>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub param: Option<SweepParam>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub stats: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    fn cutoff(&self) -> Result<Option<Cutoff>, String> {
        match &self.cutoff {
            None => Ok(None),
            Some(toml::Value::String(s)) => s.parse().map(Some),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(Cutoff::Fixed(*i as usize))),
            Some(v) => Err(format!("bad cutoff in config: {v}")),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub n: usize,
    pub alpha: f64,
    pub r: f64,
    pub eps: f64,
    pub eps_phase: f64,
    pub theta0: f64,
    pub points: Option<usize>,
    pub xrange: Option<Range>,
    pub yrange: Option<Range>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cutoff: Cutoff,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(command: &'static str, args: &CommonArgs, default_format: Format) -> Result<(Self, FileConfig), String> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let cfg = RunConfig {
            command,
            n: args.n.or(file.n).unwrap_or(0),
            alpha: args.alpha.or(file.alpha).unwrap_or(0.0),
            r: args.r.or(file.r).unwrap_or(0.0),
            eps: args.eps.or(file.eps).unwrap_or(0.0),
            eps_phase: args.eps_phase.or(file.eps_phase).unwrap_or(0.0),
            theta0: args.theta0.or(file.theta0).unwrap_or(-PI),
            points: args.points.or(file.points),
            xrange: args.xrange.or(file.xrange),
            yrange: args.yrange.or(file.yrange),
            nx: args.nx.or(file.nx),
            ny: args.ny.or(file.ny),
            cutoff: match args.cutoff {
                Some(c) => c,
                None => file.cutoff()?.unwrap_or(Cutoff::Auto),
            },
            tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL_NORM),
            format: args.format.or(file.format).unwrap_or(default_format),
            out: args.out.clone().or(file.out.clone()),
        };
        Ok((cfg, file))
    }

    pub fn state_params(&self) -> crate::Result<StateParams> {
        let phase = self.eps_phase + if self.eps < 0.0 { PI } else { 0.0 };
        StateParams::with_polar_eps(self.n, self.alpha, self.r, self.eps.abs(), phase)
    }

    pub fn grid_spec(&self, params: &StateParams) -> GridSpec {
        let mut g = GridSpec::default_for(params);
        if let Some(Range(lo, hi)) = self.xrange {
            g.x_min = lo;
            g.x_max = hi;
        }
        if let Some(Range(lo, hi)) = self.yrange {
            g.y_min = lo;
            g.y_max = hi;
        }
        g.nx = self.nx.unwrap_or(g.nx);
        g.ny = self.ny.unwrap_or(g.ny);
        g
    }

    /// Resolved parameters as `(key, value)` pairs for output headers.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let num = super::output::fmt_num;
        let mut m = vec![
            ("command".to_string(), self.command.to_string()),
            ("n".to_string(), self.n.to_string()),
            ("alpha".to_string(), num(self.alpha)),
            ("r".to_string(), num(self.r)),
            ("eps".to_string(), num(self.eps)),
            ("eps_phase".to_string(), num(self.eps_phase)),
            ("theta0".to_string(), num(self.theta0)),
            (
                "cutoff".to_string(),
                match self.cutoff {
                    Cutoff::Auto => "auto".to_string(),
                    Cutoff::Fixed(c) => c.to_string(),
                },
            ),
            ("tol".to_string(), num(self.tol)),
        ];
        if let Some(p) = self.points {
            m.push(("points".to_string(), p.to_string()));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_and_cutoffs() {
        assert_eq!("-2,3.5".parse::<Range>().unwrap(), Range(-2.0, 3.5));
        assert_eq!("0:1".parse::<Range>().unwrap(), Range(0.0, 1.0));
        assert!("3,1".parse::<Range>().is_err());
        assert!("1".parse::<Range>().is_err());
        assert_eq!("auto".parse::<Cutoff>().unwrap(), Cutoff::Auto);
        assert_eq!("40".parse::<Cutoff>().unwrap(), Cutoff::Fixed(40));
        assert!("-1".parse::<Cutoff>().is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file: FileConfig = toml::from_str("n = 3\nr = 0.5\ncutoff = 60\nxrange = [-1.0, 1.0]").unwrap();
        assert_eq!(file.cutoff().unwrap(), Some(Cutoff::Fixed(60)));
        assert_eq!(file.xrange, Some(Range(-1.0, 1.0)));
        let dir = std::env::temp_dir().join(format!("pbphase-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        fs::write(&path, "n = 3\nr = 0.5\n").unwrap();
        let args = CommonArgs { r: Some(0.1), config: Some(path), ..Default::default() };
        let (cfg, _) = RunConfig::resolve("coeffs", &args, Format::Csv).unwrap();
        assert_eq!((cfg.n, cfg.r, cfg.theta0), (3, 0.1, -PI));
        fs::remove_dir_all(dir).unwrap();
    }
}
