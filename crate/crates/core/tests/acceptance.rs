//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so every line is printed; the process fails if any criterion fails.

use std::f64::consts::{FRAC_1_PI, PI};
use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;

use pbphase::oracle::{adaptive_simpson, integration_half_width, overlap_coefficient, verify_expansion};
use pbphase::phase::{
    finite_s_max_deviation, phase_distribution, PhaseDistribution, PhaseStatistics, PhaseWindow,
};
use pbphase::state::{
    expand, normalization_constant, Branch, CoefficientEngine, FockExpansion, StateParams, DEFAULT_TOL_NORM,
};
use pbphase::wigner::{wigner_grid, x_marginal, GridSpec, Wavefunction, WignerFunction};
use pbphase::Error;

const NS: [usize; 4] = [0, 1, 2, 3];
const ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const RS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
const EPSS: [f64; 3] = [0.0, 1.0, -1.0];

/// Measured value of S_N at (n=1, α=0.05, r=0, ε=0), from oracle-built coefficients.
const S_N_AT_005: f64 = -0.645_516_464_931_2;

type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn p(n: usize, alpha: f64, r: f64, eps: f64) -> StateParams {
    StateParams::new(n, alpha, r, eps).unwrap()
}

fn lattice() -> Vec<StateParams> {
    let mut out = Vec::new();
    for n in NS {
        for alpha in ALPHAS {
            for r in RS {
                for eps in EPSS {
                    let sp = p(n, alpha, r, eps);
                    if normalization_constant(&sp).is_ok() {
                        out.push(sp);
                    }
                }
            }
        }
    }
    out
}

fn label(sp: &StateParams) -> String {
    format!("n={} alpha={} r={} eps={:?}", sp.n, sp.alpha, sp.r, sp.eps_real())
}

/// Largest value of `f` over the lattice, with the point that produced it.
fn worst<F>(lat: &[StateParams], f: F) -> (f64, String)
where
    F: Fn(&StateParams) -> f64 + Sync,
{
    lat.par_iter()
        .map(|sp| (f(sp), label(sp)))
        .reduce(|| (f64::NEG_INFINITY, String::new()), |a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a })
}

fn expansion(sp: &StateParams) -> FockExpansion {
    expand(sp, DEFAULT_TOL_NORM).unwrap()
}

fn distribution(e: &FockExpansion) -> PhaseDistribution {
    phase_distribution(e, PhaseWindow::for_expansion(e)).unwrap()
}

fn criterion_1(lat: &[StateParams]) -> Outcome {
    let start = Instant::now();
    let (dev, at) = worst(lat, |sp| verify_expansion(sp, 20, 1e-10).max_delta().unwrap_or(f64::NAN));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        dev < 1e-8 && secs < 300.0,
        format!("max |ΔC_m| = {dev:.3e} at {at}; {} points, {secs:.1} s", lat.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut max = 0.0f64;
    for n in NS {
        for alpha in ALPHAS {
            for eps in EPSS {
                let at0 = p(n, alpha, 0.0, eps);
                let Ok(l0) = normalization_constant(&at0) else { continue };
                let lifted = p(n, alpha, 1e-6, eps);
                let l1 = normalization_constant(&lifted).unwrap();
                let a = CoefficientEngine::with_branch(lifted, Branch::Squeezed).unwrap().unnormalized(40).unwrap();
                let b = CoefficientEngine::with_branch(at0, Branch::Displaced).unwrap().unnormalized(40).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    max = max.max((l1 * x - l0 * y).abs());
                }
            }
        }
    }
    outcome(max < 1e-4, format!("max coefficient gap = {max:.3e}"))
}

fn criterion_3(lat: &[StateParams]) -> Outcome {
    let (coef, _) = worst(lat, |sp| {
        let e = expansion(sp);
        (e.norm_sqr() - 1.0).abs().max(((e.lambda_closed / e.lambda).powi(2) - 1.0).abs())
    });
    let (phase, _) = worst(lat, |sp| (distribution(&expansion(sp)).integral() - 1.0).abs());
    let (wig, _) = worst(lat, |sp| (wigner_grid(sp, GridSpec::default_for(sp)).unwrap().integral() - 1.0).abs());
    let (wave, _) = worst(lat, |sp| {
        let psi = Wavefunction::new(sp).unwrap();
        let half = integration_half_width(sp, 0);
        (adaptive_simpson(|q| psi.eval(q).norm_sqr(), -half, half, 1e-11).unwrap() - 1.0).abs()
    });
    outcome(
        coef < 1e-9 && phase < 1e-8 && wig < 1e-6 && wave < 1e-8,
        format!("Σ|C|² {coef:.2e}, ∫P {phase:.2e}, ∫∫W {wig:.2e}, ∫|ψ|² {wave:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut flat = 0.0f64;
    let mut var = 0.0f64;
    for n in 0..=20 {
        let e = expansion(&p(n, 0.0, 0.0, 0.0));
        let d = distribution(&e);
        flat = flat.max(d.values.iter().map(|v| (v - 0.5 * FRAC_1_PI).abs()).fold(0.0, f64::max));
        let s = PhaseStatistics::from_parts(&e, &d);
        var = var.max((s.phase_variance - PI * PI / 3.0).abs()).max((s.phase_variance_closed - PI * PI / 3.0).abs());
    }
    let w0 = (WignerFunction::new(&p(0, 1.0, 0.0, 0.0)).unwrap().eval(1.0, 0.0) - 2.0 * FRAC_1_PI).abs();
    let w1 = (WignerFunction::new(&p(1, 0.0, 0.0, 0.0)).unwrap().eval(0.0, 0.0) + 2.0 * FRAC_1_PI).abs();
    outcome(
        flat < 1e-9 && var < 1e-9 && w0 < 1e-9 && w1 < 1e-9,
        format!("Fock |P-1/2π| {flat:.2e}, |var-π²/3| {var:.2e}, W(α,0) {w0:.2e}, W(0,0) {w1:.2e}"),
    )
}

fn criterion_5(lat: &[StateParams]) -> Outcome {
    let mut nonzero = 0usize;
    let mut checked = 0usize;
    for sp in lat.iter().filter(|sp| sp.eps_mod == 1.0) {
        let e = expansion(sp);
        let allowed_parity = if sp.eps_phase == 0.0 { 0 } else { 1 };
        for (m, c) in e.coefficients.iter().enumerate() {
            if (m + sp.n) % 2 != allowed_parity {
                checked += 1;
                if c.re.to_bits() != 0 || c.im.to_bits() != 0 {
                    nonzero += 1;
                }
            }
        }
    }
    outcome(nonzero == 0, format!("{checked} forbidden coefficients, {nonzero} not bitwise zero"))
}

fn peaks(n: usize, alpha: f64) -> usize {
    distribution(&expansion(&p(n, alpha, 0.0, 0.0))).local_maxima()
}

fn criterion_6() -> Outcome {
    let counts: Vec<usize> = [1, 2, 3].iter().map(|&n| peaks(n, 2.0)).collect();
    let three = peaks(2, 1.0);
    let pass = counts == [2, 3, 4] && three == 3;
    outcome(pass, format!("α=2: n=1,2,3 → {counts:?} maxima; α=1, n=2 → {three}"))
}

fn criterion_7(lat: &[StateParams]) -> Outcome {
    let (d, at) = worst(lat, |sp| {
        let e = expansion(sp);
        let s = PhaseStatistics::from_parts(&e, &distribution(&e));
        (s.phase_variance - s.phase_variance_closed).abs()
    });
    outcome(d < 1e-6, format!("max |closed - integral| = {d:.3e} at {at}"))
}

fn criterion_8(lat: &[StateParams]) -> Outcome {
    let (v, at) = worst(lat, |sp| {
        let e = expansion(sp);
        -PhaseStatistics::from_parts(&e, &distribution(&e)).uncertainty_slack()
    });
    outcome(v <= 1e-9, format!("min slack ΔΦ²Δn² - c²/4 = {:.3e} at {at}", -v))
}

fn criterion_9(lat: &[StateParams]) -> Outcome {
    let (d, at) = worst(lat, |sp| {
        let g = wigner_grid(sp, GridSpec::default_for(sp)).unwrap();
        let psi = Wavefunction::new(sp).unwrap();
        x_marginal(&g).into_iter().map(|(q, m)| (m - psi.eval(q).norm_sqr()).abs()).fold(0.0, f64::max)
    });
    outcome(d < 1e-6, format!("max |∫W dy - |ψ|²| = {d:.3e} at {at}"))
}

fn criterion_10() -> Outcome {
    let alphas: Vec<f64> = (0..=100).map(|k| 0.05 * k as f64).collect();
    let vars: Vec<f64> = alphas
        .par_iter()
        .map(|&a| {
            let e = expansion(&p(3, a, 0.0, 0.0));
            PhaseStatistics::from_parts(&e, &distribution(&e)).phase_variance
        })
        .collect();
    let start_ok = (vars[0] - PI * PI / 3.0).abs() < 1e-6;
    let interior_min = (1..vars.len() - 1).find(|&k| vars[k] < vars[k - 1] && vars[k] < vars[k + 1] && vars[k] < PI * PI / 3.0);
    let (kmin, vmin) = vars.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
    let detail = format!(
        "var(0) - π²/3 = {:.2e}; smallest value {vmin:.4} at α = {}; strict interior minimum: {}",
        vars[0] - PI * PI / 3.0,
        alphas[kmin],
        interior_min.map_or("none (variance decreases monotonically)".to_string(), |k| format!("α = {}", alphas[k]))
    );
    outcome(start_ok && interior_min.is_some(), detail)
}

/// S_N from coefficients built entirely by quadrature.
fn oracle_s_number(sp: &StateParams, m_max: usize) -> f64 {
    let coeffs = (0..=m_max).map(|m| overlap_coefficient(sp, m, 1e-12).unwrap()).collect();
    let e = FockExpansion::from_coefficients(*sp, coeffs);
    PhaseStatistics::compute(&e, PhaseWindow::new(-PI, 1024)).unwrap().s_number.unwrap()
}

fn criterion_11() -> Outcome {
    let sp = p(1, 0.05, 0.0, 0.0);
    let e = expansion(&sp);
    let closed = PhaseStatistics::from_parts(&e, &distribution(&e)).s_number.unwrap();
    let oracle = oracle_s_number(&sp, 24);
    let pinned = (closed - S_N_AT_005).abs() < 1e-9 && (oracle - closed).abs() < 1e-8;
    outcome(
        closed < -0.9 && pinned,
        format!("S_N(0.05) = {closed:.13} (oracle {oracle:.13}, pinned {S_N_AT_005}); threshold -0.9"),
    )
}

fn criterion_12() -> Outcome {
    let sp = p(1, 0.0, 0.0, -1.0);
    let lib = matches!(expand(&sp, DEFAULT_TOL_NORM), Err(Error::SingularState { .. }))
        && matches!(normalization_constant(&sp), Err(Error::SingularState { .. }));
    let out = Command::new(env!("CARGO_BIN_EXE_pbphase"))
        .args(["coeffs", "--n", "1", "--alpha", "0", "--r", "0", "--eps", "-1"])
        .env_remove("PBPHASE_OUT_DIR")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let cli = out.status.code() == Some(2) && stderr.contains("singular superposition") && !stdout.contains("NaN");
    outcome(lib && cli, format!("library SingularState: {lib}; CLI exit {:?}, no NaN output: {}", out.status.code(), !stdout.contains("NaN")))
}

fn criterion_13() -> Outcome {
    let points = [p(1, 1.0, 0.5, 1.0), p(2, 1.0, 0.0, 0.0), p(0, 2.0, 0.25, -1.0)];
    let mut pass = true;
    let mut parts = Vec::new();
    for sp in points {
        let e = expansion(&sp);
        let m = e.cutoff;
        let devs: Vec<f64> = [4, 8, 16].iter().map(|k| finite_s_max_deviation(&e, k * m, -PI).unwrap()).collect();
        pass &= devs[1] < devs[0] && devs[2] < devs[1];
        parts.push(format!("{} M={m}: {:.2e} {:.2e} {:.2e}", label(&sp), devs[0], devs[1], devs[2]));
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    let lat = lattice();
    let criteria: Vec<Criterion> = vec![
        (1, "oracle equivalence", Box::new(|| criterion_1(&lat))),
        (2, "branch continuity", Box::new(criterion_2)),
        (3, "normalizations", Box::new(|| criterion_3(&lat))),
        (4, "analytic spot values", Box::new(criterion_4)),
        (5, "parity selection", Box::new(|| criterion_5(&lat))),
        (6, "peak structure", Box::new(criterion_6)),
        (7, "cross-method variance", Box::new(|| criterion_7(&lat))),
        (8, "uncertainty relation", Box::new(|| criterion_8(&lat))),
        (9, "Wigner marginal", Box::new(|| criterion_9(&lat))),
        (10, "variance minimum against alpha", Box::new(criterion_10)),
        (11, "S_N limit", Box::new(criterion_11)),
        (12, "singularity handling", Box::new(criterion_12)),
        (13, "finite-s convergence", Box::new(criterion_13)),
    ];
    let mut failed = Vec::new();
    for (k, name, run) in &criteria {
        let o = run();
        println!("{} criterion {k:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*k);
        }
    }
    println!("acceptance: {} passed, {} failed {:?}", criteria.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
