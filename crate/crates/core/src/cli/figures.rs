//! Figure presets with fixed parameter sets. The fig3 squeeze values are a
//! preset constant.

use std::env;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::commands::{linspace, sweep_point, SweepStat};
use super::config::{Cutoff, FigureArgs, Preset};
use super::output::{self, csv_table, fmt_num, Meta, OUT_DIR_ENV};
use super::CliError;
use crate::phase::{phase_distribution, PhaseWindow};
use crate::state::{expand, StateParams, DEFAULT_TOL_NORM};
use crate::wigner::{wigner_grid, GridSpec};

/// Squeeze values swept by the fig3 presets.
pub const FIG3_R: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// α axis of fig4a/fig4b.
pub const FIG4_ALPHA: (f64, f64, usize) = (0.0, 5.0, 101);

const ALL: [Preset; 10] = [
    Preset::Fig1a,
    Preset::Fig1b,
    Preset::Fig2a,
    Preset::Fig2b,
    Preset::Fig3a,
    Preset::Fig3b,
    Preset::Fig3c,
    Preset::Fig3d,
    Preset::Fig4a,
    Preset::Fig4b,
];

fn name(p: Preset) -> &'static str {
    match p {
        Preset::Fig1a => "fig1a",
        Preset::Fig1b => "fig1b",
        Preset::Fig2a => "fig2a",
        Preset::Fig2b => "fig2b",
        Preset::Fig3a => "fig3a",
        Preset::Fig3b => "fig3b",
        Preset::Fig3c => "fig3c",
        Preset::Fig3d => "fig3d",
        Preset::Fig4a => "fig4a",
        Preset::Fig4b => "fig4b",
        Preset::All => "all",
    }
}

fn base_meta(preset: Preset) -> Meta {
    let mut m = Meta::new(vec![("command".to_string(), "figure".to_string())]);
    m.push("preset", name(preset));
    m
}

fn label(x: f64) -> String {
    fmt_num(x).replace('-', "m")
}

fn wigner_fig(preset: Preset, eps: f64) -> Result<String, CliError> {
    let params = StateParams::new(1, 1.0, 0.0, eps)?;
    let grid = wigner_grid(&params, GridSpec::default_for(&params))?;
    let g = grid.spec;
    let mut meta = base_meta(preset);
    meta.push("curve", format!("n=1 alpha=1 r=0 eps={}", fmt_num(eps)));
    meta.push("nx", g.nx.to_string());
    meta.push("ny", g.ny.to_string());
    let rows = (0..g.nx).flat_map(|i| (0..g.ny).map(move |j| (i, j)));
    Ok(csv_table(
        &meta,
        &["x", "y", "w"],
        rows.map(|(i, j)| vec![fmt_num(g.x(i)), fmt_num(g.y(j)), fmt_num(grid.value(i, j))]),
    ))
}

/// Phase distributions of several states on one shared θ grid.
fn phase_fig(preset: Preset, curves: &[(String, StateParams)]) -> Result<String, CliError> {
    let expansions = curves
        .iter()
        .map(|(_, p)| expand(p, DEFAULT_TOL_NORM))
        .collect::<crate::Result<Vec<_>>>()?;
    let points = expansions.iter().map(|e| PhaseWindow::for_expansion(e).points).max().unwrap_or(1024);
    let window = PhaseWindow::new(-PI, points);
    let dists = expansions
        .par_iter()
        .map(|e| phase_distribution(e, window))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut meta = base_meta(preset);
    for (col, p) in curves {
        meta.push(
            col,
            format!("n={} alpha={} r={} eps={}", p.n, fmt_num(p.alpha), fmt_num(p.r), fmt_num(real_eps(p))),
        );
    }
    meta.push("grid_points", points.to_string());
    let mut columns = vec!["theta"];
    columns.extend(curves.iter().map(|(c, _)| c.as_str()));
    Ok(csv_table(
        &meta,
        &columns,
        (0..points).map(|k| {
            std::iter::once(fmt_num(window.theta(k)))
                .chain(dists.iter().map(|d| fmt_num(d.values[k])))
                .collect()
        }),
    ))
}

fn real_eps(p: &StateParams) -> f64 {
    p.eps_real().unwrap_or(f64::NAN)
}

/// Statistics against α on the fig4 axis, one column per (curve, statistic).
fn alpha_fig(preset: Preset, curves: &[(usize, f64, f64)], stats: &[SweepStat]) -> Result<String, CliError> {
    let (from, to, steps) = FIG4_ALPHA;
    let alphas = linspace(from, to, steps);
    let mut meta = base_meta(preset);
    meta.push("theta0", fmt_num(-PI));
    let mut columns = vec!["alpha".to_string()];
    for &(n, eps, r) in curves {
        for s in stats {
            columns.push(format!("{}_eps{}_n{}_r{}", s.name(), label(eps), n, label(r)));
        }
    }
    let mut table = vec![Vec::with_capacity(columns.len()); steps];
    for (row, &a) in table.iter_mut().zip(&alphas) {
        row.push(fmt_num(a));
    }
    for &(n, eps, r) in curves {
        let results: Vec<_> = alphas
            .par_iter()
            .map(|&a| sweep_point(StateParams::new(n, a, r, eps), Cutoff::Auto, DEFAULT_TOL_NORM, None, -PI))
            .collect();
        for ((row, res), &a) in table.iter_mut().zip(results).zip(&alphas) {
            match res? {
                Some(st) => row.extend(stats.iter().map(|s| fmt_num(s.pick(&st)))),
                None => {
                    eprintln!(
                        "warning: singular superposition at alpha = {} (eps={}, n={n}, r={}); row filled with NaN",
                        fmt_num(a),
                        fmt_num(eps),
                        fmt_num(r)
                    );
                    row.extend(stats.iter().map(|_| "NaN".to_string()));
                }
            }
        }
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    Ok(csv_table(&meta, &cols, table))
}

/// Data of one preset as CSV text.
pub fn render(preset: Preset) -> Result<String, CliError> {
    let p = |n, alpha, r, eps| StateParams::new(n, alpha, r, eps);
    let r_curves = |eps: f64, alpha: f64, n: usize| -> crate::Result<Vec<(String, StateParams)>> {
        FIG3_R.iter().map(|&r| Ok((format!("p_r{}", label(r)), p(n, alpha, r, eps)?))).collect()
    };
    match preset {
        Preset::Fig1a => wigner_fig(preset, 1.0),
        Preset::Fig1b => wigner_fig(preset, -1.0),
        Preset::Fig2a => phase_fig(
            preset,
            &[("p_n1".into(), p(1, 2.0, 0.0, 1.0)?), ("p_n2".into(), p(2, 2.0, 0.0, 1.0)?)],
        ),
        Preset::Fig2b => phase_fig(
            preset,
            &[
                ("p_eps0".into(), p(1, 1.0, 0.0, 0.0)?),
                ("p_eps1".into(), p(1, 1.0, 0.0, 1.0)?),
                ("p_epsm1".into(), p(1, 1.0, 0.0, -1.0)?),
            ],
        ),
        Preset::Fig3a => phase_fig(preset, &r_curves(0.0, 1.0, 2)?),
        Preset::Fig3b => phase_fig(preset, &r_curves(1.0, 1.0, 2)?),
        Preset::Fig3c => phase_fig(preset, &r_curves(-1.0, 1.0, 2)?),
        Preset::Fig3d => phase_fig(preset, &r_curves(1.0, 2.0, 2)?),
        Preset::Fig4a => alpha_fig(
            preset,
            &[(3, 0.0, 0.0), (1, 1.0, 0.0), (3, 1.0, 0.0), (3, -1.0, 0.0)],
            &[SweepStat::Variance],
        ),
        Preset::Fig4b => alpha_fig(
            preset,
            &[(1, 0.0, 0.0), (2, 0.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 0.0), (2, 1.0, 0.5)],
            &[SweepStat::SNumber, SweepStat::SPhase],
        ),
        Preset::All => Err(CliError::Usage("`all` expands to several presets".into())),
    }
}

fn out_dir(arg: Option<&Path>) -> PathBuf {
    arg.map(Path::to_path_buf)
        .or_else(|| env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn figure(args: &FigureArgs) -> Result<(), CliError> {
    let dir = out_dir(args.out.as_deref());
    let presets: Vec<Preset> = if args.preset == Preset::All { ALL.to_vec() } else { vec![args.preset] };
    for preset in presets {
        let content = render(preset)?;
        let path = dir.join(format!("{}.csv", name(preset)));
        output::emit(Some(&path), &content).map_err(CliError::Io)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
