//! Oracle and invariant suite over the standard parameter lattice.

use std::f64::consts::{FRAC_1_PI, PI};
use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{LatticeSize, VerifyArgs};
use super::output::{self, fmt_num};
use super::CliError;
use crate::oracle::{adaptive_simpson, integration_half_width, verify_expansion};
use crate::phase::{phase_distribution, PhaseStatistics, PhaseWindow};
use crate::state::{expand, normalization_constant, Branch, CoefficientEngine, StateParams, DEFAULT_TOL_NORM};
use crate::wigner::{wigner_grid, x_marginal, GridSpec, Wavefunction, WignerFunction};

/// Highest Fock index compared against the oracle.
pub const ORACLE_M_MAX: usize = 20;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub point: String,
    /// Measured error, `NaN` when the computation itself failed.
    pub error: f64,
    pub limit: f64,
    pub note: Option<String>,
}

impl Check {
    fn new(name: &'static str, point: &str, error: f64, limit: f64) -> Self {
        Self { name, point: point.to_string(), error, limit, note: None }
    }

    fn failed(name: &'static str, point: &str, limit: f64, why: impl ToString) -> Self {
        Self { note: Some(why.to_string()), ..Self::new(name, point, f64::NAN, limit) }
    }

    /// Strict `error < limit`; NaN never passes.
    pub fn passed(&self) -> bool {
        self.error < self.limit
    }
}

pub fn lattice(size: LatticeSize) -> Vec<StateParams> {
    let (ns, alphas, rs): (&[usize], &[f64], &[f64]) = match size {
        LatticeSize::Full => (&[0, 1, 2, 3], &[0.0, 0.5, 1.0, 2.0], &[0.0, 0.25, 0.5, 1.0]),
        LatticeSize::Small => (&[0, 1], &[0.0, 1.0], &[0.0, 0.5]),
    };
    let mut out = Vec::new();
    for &n in ns {
        for &alpha in alphas {
            for &r in rs {
                for &eps in &[0.0, 1.0, -1.0] {
                    let p = StateParams::new(n, alpha, r, eps).expect("lattice values are valid");
                    if normalization_constant(&p).is_ok() {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn point_label(p: &StateParams) -> String {
    format!(
        "n={} alpha={} r={} eps={}",
        p.n,
        fmt_num(p.alpha),
        fmt_num(p.r),
        fmt_num(p.eps_real().unwrap_or(f64::NAN))
    )
}

/// Every check at one lattice point.
pub fn check_point(p: &StateParams, oracle_tol: f64, norm_tol: f64) -> Vec<Check> {
    let at = point_label(p);
    let mut out = Vec::new();

    let rep = verify_expansion(p, ORACLE_M_MAX, oracle_tol);
    out.push(match rep.max_delta() {
        Some(d) => Check::new("oracle_max_dev", &at, d, 10.0 * oracle_tol),
        None => Check::failed(
            "oracle_max_dev",
            &at,
            10.0 * oracle_tol,
            format!("{:?} / {:?}", rep.closed_error, rep.oracle_error),
        ),
    });

    let e = match expand(p, DEFAULT_TOL_NORM) {
        Ok(e) => e,
        Err(err) => {
            out.push(Check::failed("expansion", &at, 0.0, err));
            return out;
        }
    };
    // truncated sum against the closed-form normalization, plus the renormalized sum
    let closed_ratio = (e.lambda_closed / e.lambda).powi(2);
    let norm_err = (e.norm_sqr() - 1.0).abs().max((closed_ratio - 1.0).abs());
    out.push(Check::new("coeff_norm", &at, norm_err, norm_tol));

    if let Some(eps) = p.eps_real().filter(|x| x.abs() == 1.0) {
        let forbidden_odd = eps > 0.0;
        let nonzero = e
            .coefficients
            .iter()
            .enumerate()
            .filter(|(m, _)| ((m + p.n) % 2 == 1) == forbidden_odd)
            .filter(|(_, c)| c.re.to_bits() != 0 || c.im.to_bits() != 0)
            .count();
        let mut c = Check::new("parity_zero", &at, nonzero as f64, 0.5);
        c.note = Some(format!("{nonzero} nonzero forbidden coefficients"));
        out.push(c);
    }

    if p.r == 0.0 {
        let lifted = StateParams { r: 1e-6, ..*p };
        let dev = CoefficientEngine::with_branch(lifted, Branch::Squeezed)
            .and_then(|sq| sq.unnormalized(ORACLE_M_MAX))
            .and_then(|a| {
                let b = CoefficientEngine::with_branch(*p, Branch::Displaced)?.unnormalized(ORACLE_M_MAX)?;
                let (la, lb) = (normalization_constant(&lifted)?, normalization_constant(p)?);
                Ok(a.iter().zip(&b).map(|(x, y)| (la * x - lb * y).abs()).fold(0.0, f64::max))
            });
        out.push(match dev {
            Ok(d) => Check::new("branch_continuity", &at, d, 1e-4),
            Err(err) => Check::failed("branch_continuity", &at, 1e-4, err),
        });
    }

    match phase_distribution(&e, PhaseWindow::for_expansion(&e)) {
        Ok(dist) => {
            out.push(Check::new("phase_integral", &at, (dist.integral() - 1.0).abs(), 1e-8));
            let s = PhaseStatistics::from_parts(&e, &dist);
            out.push(Check::new(
                "variance_cross_method",
                &at,
                (s.phase_variance - s.phase_variance_closed).abs(),
                1e-6,
            ));
            out.push(Check::new("uncertainty", &at, (-s.uncertainty_slack()).max(0.0), 1e-9));
            if p.alpha == 0.0 && p.r == 0.0 {
                let flat = dist.values.iter().map(|v| (v - 0.5 * FRAC_1_PI).abs()).fold(0.0, f64::max);
                out.push(Check::new("fock_flat_phase", &at, flat, 1e-9));
                out.push(Check::new(
                    "fock_variance",
                    &at,
                    (s.phase_variance_closed - PI * PI / 3.0).abs(),
                    1e-9,
                ));
            }
        }
        Err(err) => out.push(Check::failed("phase_integral", &at, 1e-8, err)),
    }

    match wigner_grid(p, GridSpec::default_for(p)) {
        Ok(g) => {
            out.push(Check::new("wigner_integral", &at, (g.integral() - 1.0).abs(), 1e-6));
            let psi = Wavefunction::new(p).expect("state already normalized");
            let dev = x_marginal(&g)
                .into_iter()
                .map(|(q, d)| (d - psi.eval(q).norm_sqr()).abs())
                .fold(0.0, f64::max);
            out.push(Check::new("wigner_marginal", &at, dev, 1e-6));
        }
        Err(err) => out.push(Check::failed("wigner_integral", &at, 1e-6, err)),
    }

    let norm = Wavefunction::new(p).and_then(|psi| {
        let half = integration_half_width(p, 0);
        adaptive_simpson(|q| psi.eval(q).norm_sqr(), -half, half, 1e-10)
    });
    out.push(match norm {
        Ok(v) => Check::new("wavefunction_norm", &at, (v - 1.0).abs(), 1e-8),
        Err(err) => Check::failed("wavefunction_norm", &at, 1e-8, err),
    });
    out
}

fn spot_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let two_over_pi = 2.0 * FRAC_1_PI;
    for (n, alpha, x, want) in [(0, 1.0, 1.0, two_over_pi), (1, 0.0, 0.0, -two_over_pi)] {
        let p = StateParams::new(n, alpha, 0.0, 0.0).expect("valid");
        let at = point_label(&p);
        out.push(match WignerFunction::new(&p) {
            Ok(w) => Check::new("wigner_spot", &at, (w.eval(x, 0.0) - want).abs(), 1e-9),
            Err(err) => Check::failed("wigner_spot", &at, 1e-9, err),
        });
    }
    out
}

pub fn run_suite(size: LatticeSize, oracle_tol: f64, norm_tol: f64) -> Vec<Check> {
    let points = lattice(size);
    let mut checks: Vec<Check> = points
        .par_iter()
        .flat_map_iter(|p| check_point(p, oracle_tol, norm_tol))
        .collect();
    checks.extend(spot_checks());
    checks
}

pub fn report(checks: &[Check], size: LatticeSize, oracle_tol: f64, norm_tol: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# version = pbphase {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command = verify");
    let _ = writeln!(s, "# lattice_size = {}", if size == LatticeSize::Full { "full" } else { "small" });
    let _ = writeln!(s, "# tol = {}", fmt_num(oracle_tol));
    let _ = writeln!(s, "# norm_tol = {}", fmt_num(norm_tol));
    let _ = writeln!(s, "status,check,point,error,limit,note");
    for c in checks {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.point,
            fmt_num(c.error),
            fmt_num(c.limit),
            c.note.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let _ = writeln!(s, "# checks = {}, failed = {failed}", checks.len());
    s
}

/// Returns `Ok(true)` when every check passes.
pub fn verify(args: &VerifyArgs) -> Result<bool, CliError> {
    if !(1e-12..=1e-6).contains(&args.tol) {
        return Err(CliError::Usage(format!("--tol must lie in [1e-12, 1e-6], got {}", args.tol)));
    }
    if args.norm_tol.is_nan() || args.norm_tol < 0.0 {
        return Err(CliError::Usage(format!("--norm-tol must be >= 0, got {}", args.norm_tol)));
    }
    let checks = run_suite(args.lattice_size, args.tol, args.norm_tol);
    let text = report(&checks, args.lattice_size, args.tol, args.norm_tol);
    let target = output::resolve_target(args.out.as_deref(), "verify_report.csv");
    output::emit(target.as_deref(), &text).map_err(CliError::Io)?;
    let failures: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
    for c in failures.iter().take(20) {
        eprintln!("FAIL {} at {}: error {} (limit {})", c.name, c.point, fmt_num(c.error), fmt_num(c.limit));
    }
    if failures.len() > 20 {
        eprintln!("... {} more failures", failures.len() - 20);
    }
    eprintln!("verify: {} checks, {} failed", checks.len(), failures.len());
    Ok(failures.is_empty())
}
