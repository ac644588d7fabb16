//! The superposition `λ [D(α) + ε D(-α)] S(r) |n⟩` and its Fock-basis
//! coefficients.
//!
//! Coefficients for `r > R_SWITCH` come from the squeezed closed form, whose
//! imaginary-argument Hermite factor is rewritten through
//! [`hermite_imag_scaled`](crate::specfun::hermite_imag_scaled) so that all
//! arithmetic stays real. At `r <= R_SWITCH` the displaced-number-state limit
//! (associated Laguerre form) is used instead, since the squeezed form carries
//! `1/sqrt(sinh 2r)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{
    assoc_laguerre, hermite_imag_scaled_log_table, hermite_log_table, laguerre, log_factorial,
    SignedLogValue, MAX_DEGREE,
};

/// Default truncation tolerance on the discarded probability.
pub const DEFAULT_TOL_NORM: f64 = 1e-10;
/// `|λ|^-2` at or below this value is treated as the zero vector.
pub const TOL_SINGULAR: f64 = 1e-12;
/// Squeeze parameter at or below which the `r = 0` form is used.
pub const R_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateParams {
    pub n: usize,
    pub alpha: f64,
    pub r: f64,
    pub eps_mod: f64,
    /// Argument of ε, kept in `[0, 2π)`.
    pub eps_phase: f64,
}

impl StateParams {
    /// Real ε: negative values are stored as `|ε|` with phase π.
    pub fn new(n: usize, alpha: f64, r: f64, eps: f64) -> Result<Self> {
        let phase = if eps < 0.0 { PI } else { 0.0 };
        Self::with_polar_eps(n, alpha, r, eps.abs(), phase)
    }

    pub fn with_polar_eps(
        n: usize,
        alpha: f64,
        r: f64,
        eps_mod: f64,
        eps_phase: f64,
    ) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!("r must be finite and >= 0, got {r}")));
        }
        if !(eps_mod.is_finite() && eps_mod >= 0.0) {
            return Err(Error::InvalidParameter(format!("|eps| must be finite and >= 0, got {eps_mod}")));
        }
        if !eps_phase.is_finite() {
            return Err(Error::InvalidParameter(format!("eps phase must be finite, got {eps_phase}")));
        }
        if n > MAX_DEGREE {
            return Err(Error::DegreeTooLarge { degree: n, cap: MAX_DEGREE });
        }
        let mut eps_phase = eps_phase.rem_euclid(TAU);
        if eps_phase >= TAU {
            eps_phase = 0.0;
        }
        Ok(Self { n, alpha, r, eps_mod, eps_phase })
    }

    /// `t = α cosh r + α* sinh r`, real for real α.
    pub fn t(&self) -> f64 {
        self.alpha * self.r.cosh() + self.alpha * self.r.sinh()
    }

    /// `τ = α e^r`.
    pub fn tau(&self) -> f64 {
        self.alpha * self.r.exp()
    }

    /// ε as a real number, when its phase is 0 or π.
    pub fn eps_real(&self) -> Option<f64> {
        if self.eps_mod == 0.0 || self.eps_phase == 0.0 {
            Some(self.eps_mod)
        } else if self.eps_phase == PI {
            Some(-self.eps_mod)
        } else {
            None
        }
    }

    fn eps_cos_phase(&self) -> f64 {
        match self.eps_real() {
            Some(e) if self.eps_mod > 0.0 => e.signum(),
            Some(_) => 1.0,
            None => self.eps_phase.cos(),
        }
    }
}

/// `|λ_ε|^-2` from the closed form.
pub fn inverse_norm_squared(params: &StateParams) -> Result<f64> {
    let t = params.t();
    let x = 4.0 * t * t;
    let overlap = (-2.0 * t * t).exp() * laguerre(params.n, x)?;
    let e = params.eps_mod;
    Ok(1.0 + e * e + 2.0 * e * overlap * params.eps_cos_phase())
}

/// Positive root λ_ε of the closed-form normalization.
pub fn normalization_constant(params: &StateParams) -> Result<f64> {
    let inv = inverse_norm_squared(params)?;
    if inv <= TOL_SINGULAR {
        return Err(Error::SingularState {
            inv_norm_sq: inv,
            threshold: TOL_SINGULAR,
        });
    }
    Ok(inv.sqrt().recip())
}

/// Which closed form produces the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Squeezed,
    Displaced,
}

impl Branch {
    pub fn for_params(params: &StateParams) -> Self {
        if params.r > R_SWITCH {
            Branch::Squeezed
        } else {
            Branch::Displaced
        }
    }
}

/// Produces the coefficients `C_m / λ_ε` (λ factored out).
#[derive(Debug, Clone)]
pub struct CoefficientEngine {
    params: StateParams,
    eps: f64,
    branch: Branch,
}

impl CoefficientEngine {
    pub fn new(params: StateParams) -> Result<Self> {
        Self::with_branch(params, Branch::for_params(&params))
    }

    /// Forces a branch. The squeezed branch requires `r > 0`.
    pub fn with_branch(params: StateParams, branch: Branch) -> Result<Self> {
        let eps = params
            .eps_real()
            .ok_or(Error::UnsupportedPhase { phase: params.eps_phase })?;
        if branch == Branch::Squeezed && params.r <= 0.0 {
            return Err(Error::InvalidParameter(
                "squeezed closed form needs r > 0".to_string(),
            ));
        }
        Ok(Self { params, eps, branch })
    }

    pub fn params(&self) -> &StateParams {
        &self.params
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    fn parity_factor(&self, m: usize) -> f64 {
        if (self.params.n + m).is_multiple_of(2) {
            1.0 + self.eps
        } else {
            1.0 - self.eps
        }
    }

    /// `C_m / λ_ε` for `m = 0..=m_max`.
    pub fn unnormalized(&self, m_max: usize) -> Result<Vec<f64>> {
        if m_max > MAX_DEGREE {
            return Err(Error::DegreeTooLarge { degree: m_max, cap: MAX_DEGREE });
        }
        let raw = match self.branch {
            Branch::Squeezed => self.squeezed(m_max)?,
            Branch::Displaced => self.displaced(m_max)?,
        };
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(m, c)| {
                let f = self.parity_factor(m);
                if f == 0.0 || c == 0.0 {
                    0.0
                } else {
                    c * f
                }
            })
            .collect())
    }

    fn squeezed(&self, m_max: usize) -> Result<Vec<f64>> {
        let StateParams { n, r, .. } = self.params;
        let tanh = r.tanh();
        let sinh2r = (2.0 * r).sinh();
        let tau = self.params.tau();
        let ln_half_tanh = (0.5 * tanh).ln();
        let ln_two_over_root = (2.0 / sinh2r.sqrt()).ln();
        let g = hermite_imag_scaled_log_table(n, self.params.alpha / sinh2r.sqrt())?;
        let h = hermite_log_table(m_max, tau / sinh2r.sqrt())?;
        let ln_fn = log_factorial(n);
        let common = 0.5 * tau * tau * (tanh - 1.0) - 0.5 * (ln_fn + r.cosh().ln());

        let mut terms: Vec<SignedLogValue> = Vec::with_capacity(n + 1);
        let mut out = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let ln_fm = log_factorial(m);
            terms.clear();
            for j in 0..=m.min(n) {
                let k = n - j;
                let gk = g[k];
                let hk = h[m - j];
                if gk.is_zero() || hk.is_zero() {
                    continue;
                }
                let ln_comb =
                    ln_fn + ln_fm - log_factorial(j) - log_factorial(k) - log_factorial(m - j);
                let ln_mag = ln_comb
                    + j as f64 * ln_two_over_root
                    + 0.5 * k as f64 * ln_half_tanh
                    + gk.log_magnitude
                    + hk.log_magnitude;
                let sign = if k % 2 == 0 { 1 } else { -1 } * gk.sign * hk.sign;
                terms.push(SignedLogValue::new(sign, ln_mag));
            }
            let prefactor = 0.5 * m as f64 * ln_half_tanh - 0.5 * ln_fm + common;
            out.push(sum_signed_logs(&mut terms, prefactor));
        }
        Ok(out)
    }

    fn displaced(&self, m_max: usize) -> Result<Vec<f64>> {
        let StateParams { n, alpha, .. } = self.params;
        let a2 = alpha * alpha;
        let mut out = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let (p, q) = (m.min(n), m.max(n));
            let d = q - p;
            if d > 0 && alpha == 0.0 {
                out.push(0.0);
                continue;
            }
            let lag = assoc_laguerre(p, d, a2)?;
            if lag == 0.0 {
                out.push(0.0);
                continue;
            }
            let mut sign = if (n - p) % 2 == 0 { 1.0 } else { -1.0 };
            if alpha < 0.0 && d % 2 == 1 {
                sign = -sign;
            }
            let ln_pow = if d > 0 { d as f64 * alpha.abs().ln() } else { 0.0 };
            let ln_mag =
                0.5 * (log_factorial(p) - log_factorial(q)) + ln_pow - 0.5 * a2 + lag.abs().ln();
            out.push(sign * lag.signum() * ln_mag.exp());
        }
        Ok(out)
    }
}

/// Sums signed-log terms in descending magnitude after scaling by the largest,
/// then multiplies by `exp(ln_scale)`.
fn sum_signed_logs(terms: &mut [SignedLogValue], ln_scale: f64) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    terms.sort_by(|a, b| b.log_magnitude.total_cmp(&a.log_magnitude));
    let top = terms[0].log_magnitude;
    let s: f64 = terms
        .iter()
        .map(|t| f64::from(t.sign) * (t.log_magnitude - top).exp())
        .sum();
    if s == 0.0 {
        return 0.0;
    }
    s.signum() * (s.abs().ln() + top + ln_scale).exp()
}

/// Single coefficient `C_m`, normalized with the renormalized λ_ε of the
/// default-tolerance expansion.
pub fn coefficient(params: &StateParams, m: usize) -> Result<Complex64> {
    let lambda = expand(params, DEFAULT_TOL_NORM)?.lambda;
    let c = CoefficientEngine::new(*params)?.unnormalized(m)?[m];
    Ok(Complex64::new(lambda * c, 0.0))
}

/// Truncated Fock-basis expansion of a [`StateParams`] state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockExpansion {
    pub coefficients: Vec<Complex64>,
    pub cutoff: usize,
    /// Estimated probability beyond `cutoff`.
    pub tail_mass: f64,
    pub params: StateParams,
    /// λ_ε recomputed from the truncated coefficient sums.
    pub lambda: f64,
    /// λ_ε from the closed form.
    pub lambda_closed: f64,
}

impl FockExpansion {
    /// An expansion from explicit coefficients; `params` is informational.
    pub fn from_coefficients(params: StateParams, coefficients: Vec<Complex64>) -> Self {
        let cutoff = coefficients.len().saturating_sub(1);
        Self {
            coefficients,
            cutoff,
            tail_mass: 0.0,
            params,
            lambda: 1.0,
            lambda_closed: 1.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Initial cutoff guess before adaptive doubling.
pub fn initial_cutoff(params: &StateParams) -> usize {
    let reach = params.alpha.abs() * params.r.exp() + 4.0;
    let guess = ((reach * reach).ceil() as usize + 16)
        .max(4 * params.n)
        .max(32);
    guess.min(MAX_DEGREE)
}

/// Builds the normalized expansion, doubling the cutoff until the top eight
/// coefficients carry less than `tol_norm * 1e-2` and the summed norm matches
/// the closed-form normalization within `tol_norm`.
pub fn expand(params: &StateParams, tol_norm: f64) -> Result<FockExpansion> {
    if !(tol_norm > 0.0 && tol_norm <= 1e-4) {
        return Err(Error::InvalidParameter(format!(
            "tol_norm must lie in (0, 1e-4], got {tol_norm}"
        )));
    }
    let lambda_closed = normalization_constant(params)?;
    let closed = lambda_closed.powi(-2);
    // rounding floor of the closed form when it cancels (ε = -1, small α)
    let closed_noise = 8.0 * f64::EPSILON * (1.0 + params.eps_mod * params.eps_mod) / closed;
    let engine = CoefficientEngine::new(*params)?;

    let mut cutoff = initial_cutoff(params);
    loop {
        let raw = engine.unnormalized(cutoff)?;
        let total: f64 = raw.iter().map(|c| c * c).sum();
        let top: f64 = raw[cutoff.saturating_sub(7)..].iter().map(|c| c * c).sum();
        let converged =
            top / closed < tol_norm * 1e-2 && (total / closed - 1.0).abs() < tol_norm + closed_noise;
        if converged {
            let lambda = total.sqrt().recip();
            let mut coefficients: Vec<Complex64> =
                raw.iter().map(|&c| Complex64::new(lambda * c, 0.0)).collect();
            while coefficients.len() > 1 && coefficients.last().is_some_and(|c| c.norm_sqr() == 0.0) {
                coefficients.pop();
            }
            return Ok(FockExpansion {
                cutoff: coefficients.len() - 1,
                coefficients,
                tail_mass: (1.0 - total / closed).max(0.0),
                params: *params,
                lambda,
                lambda_closed,
            });
        }
        if cutoff >= MAX_DEGREE {
            return Err(Error::TruncationFailure { cap: MAX_DEGREE, tol: tol_norm });
        }
        cutoff = (2 * cutoff).min(MAX_DEGREE);
    }
}

/// Expansion truncated at a caller-chosen cutoff, renormalized to unit norm.
/// No tolerance is enforced; `tail_mass` reports what the cutoff drops.
pub fn expand_with_cutoff(params: &StateParams, cutoff: usize) -> Result<FockExpansion> {
    let lambda_closed = normalization_constant(params)?;
    let closed = lambda_closed.powi(-2);
    let raw = CoefficientEngine::new(*params)?.unnormalized(cutoff)?;
    let total: f64 = raw.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} keeps no weight of the state"
        )));
    }
    let lambda = total.sqrt().recip();
    Ok(FockExpansion {
        coefficients: raw.iter().map(|&c| Complex64::new(lambda * c, 0.0)).collect(),
        cutoff,
        tail_mass: (1.0 - total / closed).max(0.0),
        params: *params,
        lambda,
        lambda_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, alpha: f64, r: f64, eps: f64) -> StateParams {
        StateParams::new(n, alpha, r, eps).unwrap()
    }

    pub(crate) fn lattice() -> Vec<StateParams> {
        let mut out = Vec::new();
        for n in 0..=3 {
            for &alpha in &[0.0, 0.5, 1.0, 2.0, 3.0] {
                for &r in &[0.0, 0.25, 0.5, 1.0] {
                    for &eps in &[0.0, 1.0, -1.0] {
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

    #[test]
    fn t_and_tau_agree() {
        for &(a, r) in &[(1.0, 0.3), (-2.0, 1.0), (0.5, 0.0)] {
            let sp = p(1, a, r, 0.0);
            assert!((sp.t() - sp.tau()).abs() <= 4.0 * f64::EPSILON * sp.tau().abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(StateParams::new(1, 1.0, -0.1, 0.0).is_err());
        assert!(StateParams::new(1, f64::NAN, 0.1, 0.0).is_err());
        assert!(StateParams::with_polar_eps(1, 1.0, 0.1, -1.0, 0.0).is_err());
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalization_constant(&p(3, 1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert!((normalization_constant(&p(2, 0.0, 0.4, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            normalization_constant(&p(1, 0.0, 0.0, -1.0)),
            Err(Error::SingularState { .. })
        ));
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficient(&p(0, 1.3, 0.0, 0.0), 2).unwrap();
        let want = (-0.845f64).exp() * 1.3 * 1.3 / 2f64.sqrt();
        assert!((c.re - want).abs() < 1e-14);
        assert_eq!(c.im, 0.0);

        let c = coefficient(&p(1, 1.0, 0.0, 0.0), 1).unwrap();
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn expand_examples() {
        let e = expand(&p(0, 0.0, 0.0, 0.0), DEFAULT_TOL_NORM).unwrap();
        assert_eq!(e.coefficients, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(e.cutoff, 0);
        assert_eq!(e.tail_mass, 0.0);

        let e = expand(&p(2, 0.0, 0.0, 1.0), DEFAULT_TOL_NORM).unwrap();
        assert_eq!(e.cutoff, 2);
        assert_eq!(e.coefficients[2], Complex64::new(1.0, 0.0));
        assert_eq!(e.coefficients[0], Complex64::new(0.0, 0.0));

        let e = expand(&p(1, 2.0, 0.5, 1.0), DEFAULT_TOL_NORM).unwrap();
        assert!((e.norm_sqr() - 1.0).abs() < 1e-10);
        assert!(e.cutoff <= 120, "cutoff {}", e.cutoff);
    }

    #[test]
    fn fixed_cutoff_reports_tail() {
        let sp = p(0, 2.0, 0.0, 0.0);
        let short = expand_with_cutoff(&sp, 3).unwrap();
        assert_eq!(short.coefficients.len(), 4);
        assert!((short.norm_sqr() - 1.0).abs() < 1e-14);
        // Poisson(4) mass beyond 3
        let kept: f64 = (0..=3).map(|k| (-4.0f64).exp() * 4f64.powi(k) / [1.0, 1.0, 2.0, 6.0][k as usize]).sum();
        assert!((short.tail_mass - (1.0 - kept)).abs() < 1e-12);
        assert!(expand_with_cutoff(&p(5, 0.0, 0.0, 0.0), 2).is_err());
    }

    #[test]
    fn expand_rejects_bad_tolerance() {
        assert!(expand(&p(0, 1.0, 0.0, 0.0), 0.0).is_err());
        assert!(expand(&p(0, 1.0, 0.0, 0.0), 1e-3).is_err());
    }

    #[test]
    fn complex_eps_rejected_by_engine_only() {
        let sp = StateParams::with_polar_eps(1, 1.0, 0.2, 1.0, 1.0).unwrap();
        assert!(normalization_constant(&sp).is_ok());
        assert!(matches!(expand(&sp, DEFAULT_TOL_NORM), Err(Error::UnsupportedPhase { .. })));
    }

    #[test]
    fn lattice_norm_and_tail() {
        for sp in lattice() {
            let e = expand(&sp, DEFAULT_TOL_NORM).unwrap();
            assert!((e.norm_sqr() - 1.0).abs() < 1e-9, "{sp:?}");
            assert!(e.tail_mass < DEFAULT_TOL_NORM, "{sp:?}");
            assert!(e.coefficients.iter().all(|c| c.im == 0.0));
        }
    }

    #[test]
    fn lattice_lambda_consistency() {
        for sp in lattice() {
            let e = expand(&sp, DEFAULT_TOL_NORM).unwrap();
            let rel = (e.lambda - e.lambda_closed).abs() / e.lambda_closed;
            assert!(rel < 1e-8, "{sp:?}: {} vs {}", e.lambda, e.lambda_closed);
        }
    }

    #[test]
    fn parity_zeros_are_exact() {
        for sp in lattice() {
            let Some(eps) = sp.eps_real() else { continue };
            if sp.eps_mod != 1.0 {
                continue;
            }
            let e = expand(&sp, DEFAULT_TOL_NORM).unwrap();
            for (m, c) in e.coefficients.iter().enumerate() {
                let forbidden = if eps > 0.0 { (m + sp.n) % 2 == 1 } else { (m + sp.n) % 2 == 0 };
                if forbidden {
                    assert_eq!(c.re.to_bits(), 0, "{sp:?} m={m}");
                    assert_eq!(c.im.to_bits(), 0, "{sp:?} m={m}");
                }
            }
        }
    }

    #[test]
    fn branch_continuity() {
        for n in 0..=3 {
            for &alpha in &[0.5, 1.0, 2.0] {
                for &eps in &[0.0, 1.0, -1.0] {
                    let near = CoefficientEngine::new(p(n, alpha, 1e-6, eps)).unwrap();
                    let at = CoefficientEngine::new(p(n, alpha, 0.0, eps)).unwrap();
                    assert_eq!(near.branch(), Branch::Squeezed);
                    assert_eq!(at.branch(), Branch::Displaced);
                    let (a, b) = (near.unnormalized(20).unwrap(), at.unnormalized(20).unwrap());
                    for m in 0..=20 {
                        assert!((a[m] - b[m]).abs() < 1e-4, "n={n} a={alpha} e={eps} m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_sign_flip_is_global_phase_for_cats() {
        for &eps in &[1.0, -1.0] {
            let a = expand(&p(2, 1.0, 0.3, eps), DEFAULT_TOL_NORM).unwrap();
            let b = expand(&p(2, -1.0, 0.3, eps), DEFAULT_TOL_NORM).unwrap();
            let overlap: Complex64 = a
                .coefficients
                .iter()
                .zip(&b.coefficients)
                .map(|(x, y)| x.conj() * y)
                .sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }
}
