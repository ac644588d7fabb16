//! Independent check of the closed-form coefficients: each `C_m` is
//! recomputed as the overlap integral `∫ ψ_m(q)* ψ(q) dq` of the Fock
//! eigenfunction with the position-space wavefunction.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{expand, CoefficientEngine, StateParams, DEFAULT_TOL_NORM};
use crate::wigner::Wavefunction;

pub const MAX_DEPTH: u32 = 24;
const INITIAL_PANELS: usize = 64;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure { a, b, max_depth: MAX_DEPTH });
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// Adaptive Simpson quadrature with Richardson correction. The interval is
/// first cut into 64 panels that share `tol` in proportion to their width.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut fa = f(a);
    for k in 0..INITIAL_PANELS {
        let lo = a + h * k as f64;
        let hi = if k + 1 == INITIAL_PANELS { b } else { lo + h };
        let fm = f(0.5 * (lo + hi));
        let fb = f(hi);
        let whole = simpson(fa, fm, fb, hi - lo);
        total += refine(&f, lo, hi, fa, fm, fb, whole, panel_tol, 0)?;
        fa = fb;
    }
    Ok(total)
}

/// Half-width of the integration window for `⟨m|ψ⟩`.
pub fn integration_half_width(params: &StateParams, m: usize) -> f64 {
    SQRT_2 * params.alpha.abs()
        + (8.0 + ((2 * (m + params.n) + 1) as f64).sqrt()) * (-params.r).exp().max(1.0)
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-12..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("oracle tol must lie in [1e-12, 1e-6], got {tol}")))
    }
}

/// `⟨m|ψ⟩` by quadrature, absolute error at most `tol`.
pub fn overlap_coefficient(params: &StateParams, m: usize, tol: f64) -> Result<Complex64> {
    check_tol(tol)?;
    let psi = Wavefunction::new(params)?;
    let fock = Wavefunction::fock(m)?;
    let half = integration_half_width(params, m);
    let re = adaptive_simpson(|q| fock.eval(q).re * psi.eval(q).re, -half, half, 0.5 * tol)?;
    let im = if params.eps_real().is_some() {
        0.0
    } else {
        adaptive_simpson(|q| fock.eval(q).re * psi.eval(q).im, -half, half, 0.5 * tol)?
    };
    Ok(Complex64::new(re, im))
}

/// `∫ ψ_m ψ_k dq` under the oracle's quadrature.
pub fn fock_overlap(m: usize, k: usize, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let (a, b) = (Wavefunction::fock(m)?, Wavefunction::fock(k)?);
    let half = 8.0 + ((m.max(k) * 2 + 1) as f64).sqrt();
    adaptive_simpson(|q| a.eval(q).re * b.eval(q).re, -half, half, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRow {
    pub m: usize,
    pub closed: [f64; 2],
    pub oracle: [f64; 2],
    pub delta: f64,
}

/// Side-by-side table of closed-form and quadrature coefficients.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub params: StateParams,
    pub tol: f64,
    pub rows: Vec<VerificationRow>,
    pub closed_error: Option<Error>,
    pub oracle_error: Option<Error>,
}

impl VerificationReport {
    pub fn max_delta(&self) -> Option<f64> {
        if self.closed_error.is_some() || self.oracle_error.is_some() {
            return None;
        }
        Some(self.rows.iter().map(|r| r.delta).fold(0.0, f64::max))
    }

    pub fn passed(&self) -> bool {
        self.max_delta().is_some_and(|d| d < 10.0 * self.tol)
    }
}

fn closed_coefficients(params: &StateParams, m_max: usize) -> Result<Vec<Complex64>> {
    let lambda = expand(params, DEFAULT_TOL_NORM)?.lambda;
    let raw = CoefficientEngine::new(*params)?.unnormalized(m_max)?;
    Ok(raw.into_iter().map(|c| Complex64::new(lambda * c, 0.0)).collect())
}

fn oracle_coefficients(params: &StateParams, m_max: usize, tol: f64) -> Result<Vec<Complex64>> {
    (0..=m_max).map(|m| overlap_coefficient(params, m, tol)).collect()
}

/// Compares both routes for `m = 0..=m_max`; errors land in the report.
pub fn verify_expansion(params: &StateParams, m_max: usize, tol: f64) -> VerificationReport {
    let closed = closed_coefficients(params, m_max);
    let oracle = oracle_coefficients(params, m_max, tol);
    let rows = match (&closed, &oracle) {
        (Ok(c), Ok(o)) => c
            .iter()
            .zip(o)
            .enumerate()
            .map(|(m, (c, o))| VerificationRow {
                m,
                closed: [c.re, c.im],
                oracle: [o.re, o.im],
                delta: (c - o).norm(),
            })
            .collect(),
        _ => Vec::new(),
    };
    VerificationReport {
        params: *params,
        tol,
        rows,
        closed_error: closed.err(),
        oracle_error: oracle.err(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, alpha: f64, r: f64, eps: f64) -> StateParams {
        StateParams::new(n, alpha, r, eps).unwrap()
    }

    #[test]
    fn simpson_on_known_integrals() {
        let v = adaptive_simpson(|x| (-x * x).exp(), -10.0, 10.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let v = adaptive_simpson(|x| (5.0 * x).cos(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 5f64.sin() / 5.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_reports_non_convergence() {
        let r = adaptive_simpson(|x| if x > 0.3 { 1.0 / (x - 0.3).sqrt() } else { 0.0 }, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn overlap_examples() {
        let c = overlap_coefficient(&p(0, 1.0, 0.0, 0.0), 0, 1e-12).unwrap();
        assert!((c.re - (-0.5f64).exp()).abs() < 1e-12);
        let c = overlap_coefficient(&p(1, 1.0, 0.0, 0.0), 1, 1e-12).unwrap();
        assert!(c.norm() < 1e-12);
        assert!(overlap_coefficient(&p(0, 1.0, 0.0, 0.0), 0, 1e-3).is_err());
    }

    #[test]
    fn fock_orthonormality() {
        for m in 0..=12 {
            for k in 0..=12 {
                let v = fock_overlap(m, k, 1e-12).unwrap();
                let want = if m == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10, "m={m} k={k}: {v}");
            }
        }
    }

    #[test]
    fn verify_examples() {
        let rep = verify_expansion(&p(1, 1.0, 0.5, 1.0), 12, 1e-9);
        assert!(rep.passed(), "{rep:?}");

        let rep = verify_expansion(&p(1, 0.0, 0.3, -1.0), 5, 1e-9);
        assert!(matches!(rep.closed_error, Some(Error::SingularState { .. })));
        assert!(matches!(rep.oracle_error, Some(Error::SingularState { .. })));
        assert!(!rep.passed());

        let rep = verify_expansion(&p(0, 2.0, 0.0, 0.0), 20, 1e-10);
        assert!(rep.max_delta().unwrap() < 1e-8);
    }
}
