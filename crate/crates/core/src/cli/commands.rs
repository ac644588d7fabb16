//! Single-shot subcommands and the parameter sweep.

use rayon::prelude::*;
use serde_json::{Map, Value};

use super::config::{CommonArgs, Cutoff, Format, RunConfig, SweepArgs, SweepParam};
use super::output::{self, csv_table, fmt_num, fmt_sig17, json_num, json_opt, json_table, Meta};
use super::CliError;
use crate::error::Error;
use crate::phase::{phase_distribution, PhaseStatistics, PhaseWindow};
use crate::state::{expand, expand_with_cutoff, FockExpansion, StateParams};
use crate::wigner::wigner_grid;

pub(crate) fn expansion(params: &StateParams, cutoff: Cutoff, tol: f64) -> crate::Result<FockExpansion> {
    match cutoff {
        Cutoff::Auto => expand(params, tol),
        Cutoff::Fixed(c) => expand_with_cutoff(params, c),
    }
}

pub(crate) fn window(cfg_points: Option<usize>, theta0: f64, e: &FockExpansion) -> PhaseWindow {
    let floor = PhaseWindow::for_expansion(e).points;
    PhaseWindow::new(theta0, cfg_points.unwrap_or(floor))
}

fn meta_with(cfg: &RunConfig, e: &FockExpansion) -> Meta {
    let mut meta = Meta::new(cfg.metadata());
    meta.push("resolved_cutoff", e.cutoff.to_string());
    meta.push("tail_mass", fmt_num(e.tail_mass));
    meta
}

fn write(cfg: &RunConfig, default_name: &str, content: &str) -> Result<(), CliError> {
    let target = output::resolve_target(cfg.out.as_deref(), default_name);
    output::emit(target.as_deref(), content).map_err(CliError::Io)
}

pub fn coeffs(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = RunConfig::resolve("coeffs", args, Format::Csv)?;
    let params = cfg.state_params()?;
    let e = expansion(&params, cfg.cutoff, cfg.tol)?;
    let meta = meta_with(&cfg, &e);
    let columns = ["m", "re_c", "im_c", "prob"];
    let content = match cfg.format {
        Format::Csv => csv_table(
            &meta,
            &columns,
            e.coefficients.iter().enumerate().map(|(m, c)| {
                vec![m.to_string(), fmt_sig17(c.re), fmt_sig17(c.im), fmt_sig17(c.norm_sqr())]
            }),
        ),
        Format::Json => json_table(
            &meta,
            &columns,
            e.coefficients.iter().enumerate().map(|(m, c)| {
                vec![Value::from(m), json_num(c.re), json_num(c.im), json_num(c.norm_sqr())]
            }),
        ),
    };
    write(&cfg, &format!("coeffs.{}", ext(cfg.format)), &content)
}

pub fn phase_dist(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = RunConfig::resolve("phase-dist", args, Format::Csv)?;
    let params = cfg.state_params()?;
    let e = expansion(&params, cfg.cutoff, cfg.tol)?;
    let win = window(cfg.points, cfg.theta0, &e);
    let dist = phase_distribution(&e, win)?;
    let mut meta = meta_with(&cfg, &e);
    meta.push("grid_points", win.points.to_string());
    let columns = ["theta", "p"];
    let content = match cfg.format {
        Format::Csv => csv_table(
            &meta,
            &columns,
            dist.thetas().zip(&dist.values).map(|(t, p)| vec![fmt_num(t), fmt_num(*p)]),
        ),
        Format::Json => json_table(
            &meta,
            &columns,
            dist.thetas().zip(&dist.values).map(|(t, p)| vec![json_num(t), json_num(*p)]),
        ),
    };
    write(&cfg, &format!("phase_dist.{}", ext(cfg.format)), &content)
}

const STAT_KEYS: [&str; 8] = [
    "mean_phase",
    "variance_integral",
    "variance_closed",
    "n_mean",
    "n_variance",
    "commutator_mag",
    "s_number",
    "s_phase",
];

fn stat_values(s: &PhaseStatistics) -> [Option<f64>; 8] {
    [
        Some(s.mean_phase),
        Some(s.phase_variance),
        Some(s.phase_variance_closed),
        Some(s.n_mean),
        Some(s.n_variance),
        Some(s.commutator_mag),
        s.s_number,
        s.s_phase,
    ]
}

pub fn stats(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = RunConfig::resolve("stats", args, Format::Json)?;
    let params = cfg.state_params()?;
    let e = expansion(&params, cfg.cutoff, cfg.tol)?;
    let win = window(cfg.points, cfg.theta0, &e);
    let s = PhaseStatistics::compute(&e, win)?;
    let mut meta = meta_with(&cfg, &e);
    meta.push("grid_points", win.points.to_string());
    let values = stat_values(&s);
    let content = match cfg.format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("meta".to_string(), meta.json());
            for (k, v) in STAT_KEYS.iter().zip(values) {
                obj.insert(k.to_string(), json_opt(v));
            }
            output::json_string(&Value::Object(obj))
        }
        Format::Csv => csv_table(
            &meta,
            &STAT_KEYS,
            [values.iter().map(|v| v.map_or(String::new(), fmt_num)).collect()],
        ),
    };
    write(&cfg, &format!("stats.{}", ext(cfg.format)), &content)
}

pub fn wigner(args: &CommonArgs) -> Result<(), CliError> {
    let (cfg, _) = RunConfig::resolve("wigner", args, Format::Csv)?;
    let params = cfg.state_params()?;
    let grid = wigner_grid(&params, cfg.grid_spec(&params))?;
    let g = grid.spec;
    let mut meta = Meta::new(cfg.metadata());
    meta.push("xrange", format!("{},{}", fmt_num(g.x_min), fmt_num(g.x_max)));
    meta.push("yrange", format!("{},{}", fmt_num(g.y_min), fmt_num(g.y_max)));
    meta.push("nx", g.nx.to_string());
    meta.push("ny", g.ny.to_string());
    let cells = (0..g.nx).flat_map(|i| (0..g.ny).map(move |j| (i, j)));
    let columns = ["x", "y", "w"];
    let content = match cfg.format {
        Format::Csv => csv_table(
            &meta,
            &columns,
            cells.map(|(i, j)| vec![fmt_num(g.x(i)), fmt_num(g.y(j)), fmt_num(grid.value(i, j))]),
        ),
        Format::Json => json_table(
            &meta,
            &columns,
            cells.map(|(i, j)| vec![json_num(g.x(i)), json_num(g.y(j)), json_num(grid.value(i, j))]),
        ),
    };
    write(&cfg, &format!("wigner.{}", ext(cfg.format)), &content)
}

/// Statistics selectable in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStat {
    Variance,
    VarianceClosed,
    MeanPhase,
    NMean,
    NVariance,
    Commutator,
    SNumber,
    SPhase,
}

impl SweepStat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s.trim() {
            "variance" | "variance_integral" => Self::Variance,
            "variance_closed" => Self::VarianceClosed,
            "mean_phase" => Self::MeanPhase,
            "n_mean" => Self::NMean,
            "n_variance" => Self::NVariance,
            "commutator" | "commutator_mag" => Self::Commutator,
            "s_number" => Self::SNumber,
            "s_phase" => Self::SPhase,
            other => return Err(CliError::Usage(format!("unknown statistic `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Variance => "variance",
            Self::VarianceClosed => "variance_closed",
            Self::MeanPhase => "mean_phase",
            Self::NMean => "n_mean",
            Self::NVariance => "n_variance",
            Self::Commutator => "commutator_mag",
            Self::SNumber => "s_number",
            Self::SPhase => "s_phase",
        }
    }

    /// Undefined squeezing parameters come back as NaN.
    pub fn pick(self, s: &PhaseStatistics) -> f64 {
        match self {
            Self::Variance => s.phase_variance,
            Self::VarianceClosed => s.phase_variance_closed,
            Self::MeanPhase => s.mean_phase,
            Self::NMean => s.n_mean,
            Self::NVariance => s.n_variance,
            Self::Commutator => s.commutator_mag,
            Self::SNumber => s.s_number.unwrap_or(f64::NAN),
            Self::SPhase => s.s_phase.unwrap_or(f64::NAN),
        }
    }
}

/// Statistics at one sweep point; `Ok(None)` marks a singular state.
pub(crate) fn sweep_point(
    params: crate::Result<StateParams>,
    cutoff: Cutoff,
    tol: f64,
    points: Option<usize>,
    theta0: f64,
) -> crate::Result<Option<PhaseStatistics>> {
    let run = || -> crate::Result<PhaseStatistics> {
        let e = expansion(&params?, cutoff, tol)?;
        PhaseStatistics::compute(&e, window(points, theta0, &e))
    };
    match run() {
        Ok(s) => Ok(Some(s)),
        Err(Error::SingularState { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| if k + 1 == steps { to } else { from + (to - from) * k as f64 / (steps - 1) as f64 })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (cfg, file) = RunConfig::resolve("sweep", &args.common, Format::Csv)?;
    let param = args
        .param
        .or(file.param)
        .ok_or_else(|| CliError::Usage("sweep needs --param alpha|r".into()))?;
    let from = args.from.or(file.from).ok_or_else(|| CliError::Usage("sweep needs --from".into()))?;
    let to = args.to.or(file.to).ok_or_else(|| CliError::Usage("sweep needs --to".into()))?;
    let steps = args.steps.or(file.steps).unwrap_or(51);
    if from.partial_cmp(&to) != Some(std::cmp::Ordering::Less) || steps < 2 {
        return Err(CliError::Usage(format!(
            "sweep needs from < to and steps >= 2, got from={from} to={to} steps={steps}"
        )));
    }
    let names = args
        .stats
        .clone()
        .or(file.stats.clone())
        .unwrap_or_else(|| vec!["variance".to_string()]);
    let stats: Vec<SweepStat> = names.iter().map(|s| SweepStat::parse(s)).collect::<Result<_, _>>()?;
    let pname = match param {
        SweepParam::Alpha => "alpha",
        SweepParam::R => "r",
    };
    let grid = linspace(from, to, steps);
    let results: Vec<crate::Result<Option<PhaseStatistics>>> = grid
        .par_iter()
        .map(|&v| {
            let mut c = cfg.clone();
            match param {
                SweepParam::Alpha => c.alpha = v,
                SweepParam::R => c.r = v,
            }
            sweep_point(c.state_params(), c.cutoff, c.tol, c.points, c.theta0)
        })
        .collect();

    let mut rows = Vec::with_capacity(steps);
    for (&v, res) in grid.iter().zip(results) {
        match res? {
            Some(s) => rows.push((v, stats.iter().map(|k| k.pick(&s)).collect::<Vec<_>>())),
            None => {
                eprintln!("warning: singular superposition at {pname} = {}; row filled with NaN", fmt_num(v));
                rows.push((v, vec![f64::NAN; stats.len()]));
            }
        }
    }

    let mut meta = Meta::new(cfg.metadata());
    meta.push("sweep_param", pname);
    meta.push("from", fmt_num(from));
    meta.push("to", fmt_num(to));
    meta.push("steps", steps.to_string());
    let mut columns = vec![pname];
    columns.extend(stats.iter().map(|s| s.name()));
    let content = match cfg.format {
        Format::Csv => csv_table(
            &meta,
            &columns,
            rows.iter().map(|(v, vals)| {
                std::iter::once(fmt_num(*v)).chain(vals.iter().map(|x| fmt_num(*x))).collect()
            }),
        ),
        Format::Json => json_table(
            &meta,
            &columns,
            rows.iter().map(|(v, vals)| {
                std::iter::once(json_num(*v)).chain(vals.iter().map(|x| json_num(*x))).collect()
            }),
        ),
    };
    write(&cfg, &format!("sweep_{pname}.{}", ext(cfg.format)), &content)
}

pub(crate) fn ext(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}
