//! Pegg-Barnett phase distribution and the statistics built on it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::FockExpansion;

/// Below this commutator magnitude the squeezing parameters are undefined.
pub const COMMUTATOR_FLOOR: f64 = 1e-9;
/// Relative flatness under which neighbouring samples count as one plateau.
pub const PLATEAU_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseWindow {
    pub theta0: f64,
    pub points: usize,
}

impl Default for PhaseWindow {
    fn default() -> Self {
        Self {
            theta0: -PI,
            points: 1024,
        }
    }
}

impl PhaseWindow {
    pub fn new(theta0: f64, points: usize) -> Self {
        Self { theta0, points }
    }

    /// Smallest grid that resolves an expansion with this cutoff.
    pub fn min_points(cutoff: usize) -> usize {
        8 * (cutoff + 1)
    }

    /// Default window raised to the resolution floor of `expansion`.
    pub fn for_expansion(expansion: &FockExpansion) -> Self {
        let mut w = Self::default();
        w.points = w.points.max(Self::min_points(expansion.cutoff));
        w
    }

    pub fn step(&self) -> f64 {
        TAU / self.points as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.theta0 + self.step() * k as f64
    }
}

/// `P(Θ)` sampled on `[Θ₀, Θ₀ + 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub window: PhaseWindow,
    pub values: Vec<f64>,
}

impl PhaseDistribution {
    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.window.theta(k))
    }

    /// Periodic trapezoidal integral over the window.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.window.step()
    }

    /// Number of local maxima on the periodic grid. Runs of samples equal to
    /// within `PLATEAU_TOL` (relative to the peak value) count once.
    pub fn local_maxima(&self) -> usize {
        count_local_maxima(&self.values)
    }
}

fn count_local_maxima(v: &[f64]) -> usize {
    let n = v.len();
    if n < 3 {
        return 0;
    }
    let scale = v.iter().fold(0.0_f64, |a, &b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let tol = PLATEAU_TOL * scale;
    let same = |a: f64, b: f64| (a - b).abs() <= tol;
    if v.windows(2).all(|w| same(w[0], w[1])) && same(v[0], v[n - 1]) {
        return 0;
    }
    // rotate so that index 0 starts a fresh run
    let start = (0..n).find(|&k| !same(v[k], v[(k + n - 1) % n])).unwrap_or(0);
    let at = |k: usize| v[(start + k) % n];
    let mut count = 0;
    let mut k = 0;
    while k < n {
        let mut end = k;
        while end + 1 < n && same(at(end + 1), at(k)) {
            end += 1;
        }
        let before = at((k + n - 1) % n);
        let after = at((end + 1) % n);
        if at(k) > before + tol && at(k) > after + tol {
            count += 1;
        }
        k = end + 1;
    }
    count
}

fn amplitude(coefficients: &[Complex64], theta: f64) -> Complex64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(m, c)| c * Complex64::from_polar(1.0, m as f64 * theta))
        .sum()
}

/// `P(Θ) = |Σ_m C_m e^{imΘ}|² / 2π` on the window grid.
pub fn phase_distribution(expansion: &FockExpansion, window: PhaseWindow) -> Result<PhaseDistribution> {
    let required = PhaseWindow::min_points(expansion.cutoff);
    if window.points < required {
        return Err(Error::ResolutionTooLow {
            points: window.points,
            cutoff: expansion.cutoff,
            required,
        });
    }
    let coeffs = &expansion.coefficients;
    let values = (0..window.points)
        .into_par_iter()
        .map(|k| amplitude(coeffs, window.theta(k)).norm_sqr() / TAU)
        .collect();
    Ok(PhaseDistribution { window, values })
}

/// Finite `(s+1)`-dimensional distribution `((s+1)/2π) |⟨Θ_m|ψ⟩|²` at the
/// phase-state angles `Θ_m = Θ₀ + 2πm/(s+1)`.
pub fn finite_s_distribution(expansion: &FockExpansion, s: usize, theta0: f64) -> Result<Vec<(f64, f64)>> {
    if s < expansion.cutoff {
        return Err(Error::WindowTooSmall { s, cutoff: expansion.cutoff });
    }
    let dim = (s + 1) as f64;
    let keep = &expansion.coefficients[..=expansion.cutoff.min(s)];
    Ok((0..=s)
        .into_par_iter()
        .map(|m| {
            let theta = theta0 + TAU * m as f64 / dim;
            let proj: Complex64 = keep
                .iter()
                .enumerate()
                .map(|(k, c)| c * Complex64::from_polar(1.0, -(k as f64) * theta))
                .sum::<Complex64>()
                / dim.sqrt();
            (theta, dim / TAU * proj.norm_sqr())
        })
        .collect())
}

/// Largest gap between the finite-`s` distribution, read as a step function
/// over the `s + 1` phase bins, and the continuum distribution on a reference
/// grid eight times finer than the phase-state spacing.
pub fn finite_s_max_deviation(expansion: &FockExpansion, s: usize, theta0: f64) -> Result<f64> {
    let discrete = finite_s_distribution(expansion, s, theta0)?;
    let dim = s + 1;
    let window = PhaseWindow::new(theta0, (8 * dim).max(PhaseWindow::min_points(expansion.cutoff)));
    let continuum = phase_distribution(expansion, window)?;
    Ok(continuum
        .values
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let bin = ((k as f64 * dim as f64 / window.points as f64).round() as usize) % dim;
            (p - discrete[bin].1).abs()
        })
        .fold(0.0, f64::max))
}

/// Largest gap between the finite-`s` weights and the continuum distribution
/// evaluated at the same phase-state angles.
pub fn finite_s_node_deviation(expansion: &FockExpansion, s: usize, theta0: f64) -> Result<f64> {
    let discrete = finite_s_distribution(expansion, s, theta0)?;
    let keep = &expansion.coefficients;
    Ok(discrete
        .iter()
        // the phase states carry e^{-ikΘ}, i.e. the continuum at -Θ
        .map(|&(theta, w)| (amplitude(keep, -theta).norm_sqr() / TAU - w).abs())
        .fold(0.0, f64::max))
}

/// Composite Simpson weights on `points + 1` nodes spanning one full window.
fn simpson_weights(points: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; points + 1];
    let add_simpson = |w: &mut [f64], from: usize, to: usize| {
        for k in (from..to).step_by(2) {
            w[k] += h / 3.0;
            w[k + 1] += 4.0 * h / 3.0;
            w[k + 2] += h / 3.0;
        }
    };
    if points.is_multiple_of(2) {
        add_simpson(&mut w, 0, points);
    } else {
        // Simpson on the even part, 3/8 rule on the last three intervals
        add_simpson(&mut w, 0, points - 3);
        let k = points - 3;
        for (i, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[k + i] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Mean and variance of the phase by Simpson's rule with periodic closure.
pub fn phase_moments(dist: &PhaseDistribution) -> (f64, f64) {
    let n = dist.values.len();
    let h = dist.window.step();
    let w = simpson_weights(n, h);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        let p = dist.values[k % n];
        let theta = dist.window.theta(k);
        m1 += wk * theta * p;
        m2 += wk * theta * theta * p;
    }
    (m1, m2 - m1 * m1)
}

fn pair_sums(expansion: &FockExpansion) -> (Complex64, Complex64) {
    let c = &expansion.coefficients;
    let (mut by_k, mut by_k2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for m in 1..c.len() {
        for mp in 0..m {
            let k = (m - mp) as f64;
            let sign = if (m - mp) % 2 == 0 { 1.0 } else { -1.0 };
            let prod = c[m] * c[mp].conj() * sign;
            by_k += prod / k;
            by_k2 += prod / (k * k);
        }
    }
    (by_k, by_k2)
}

/// Mean phase on the symmetric window from the coefficient pair sum.
pub fn mean_phase_closed(expansion: &FockExpansion) -> f64 {
    2.0 * pair_sums(expansion).0.im
}

/// Phase variance on the symmetric window `[-π, π)` from the coefficients.
pub fn phase_variance_closed(expansion: &FockExpansion) -> f64 {
    let (by_k, by_k2) = pair_sums(expansion);
    // Re(i Σ) = -Im Σ
    let re_i = -by_k.im;
    PI * PI / 3.0 + 4.0 * by_k2.re - 4.0 * re_i * re_i
}

/// `(⟨n⟩, ⟨n²⟩ - ⟨n⟩²)`.
pub fn number_moments(expansion: &FockExpansion) -> (f64, f64) {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (m, c) in expansion.coefficients.iter().enumerate() {
        let p = c.norm_sqr();
        let m = m as f64;
        m1 += m * p;
        m2 += m * m * p;
    }
    (m1, m2 - m1 * m1)
}

/// `|⟨[n, Φ]⟩| = |1 - 2π P(Θ₀)|`, read at the first grid point.
pub fn commutator_magnitude(dist: &PhaseDistribution) -> f64 {
    (1.0 - TAU * dist.values[0]).abs()
}

/// Number and phase squeezing parameters; `None` when the commutator vanishes.
pub fn squeezing_parameters(n_variance: f64, phase_variance: f64, commutator_mag: f64) -> (Option<f64>, Option<f64>) {
    if commutator_mag < COMMUTATOR_FLOOR {
        return (None, None);
    }
    let half = 0.5 * commutator_mag;
    (Some(n_variance / half - 1.0), Some(phase_variance / half - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStatistics {
    pub mean_phase: f64,
    pub phase_variance: f64,
    pub phase_variance_closed: f64,
    pub n_mean: f64,
    pub n_variance: f64,
    pub commutator_mag: f64,
    pub s_number: Option<f64>,
    pub s_phase: Option<f64>,
}

impl PhaseStatistics {
    pub fn compute(expansion: &FockExpansion, window: PhaseWindow) -> Result<Self> {
        let dist = phase_distribution(expansion, window)?;
        Ok(Self::from_parts(expansion, &dist))
    }

    pub fn from_parts(expansion: &FockExpansion, dist: &PhaseDistribution) -> Self {
        let (mean_phase, phase_variance) = phase_moments(dist);
        let (n_mean, n_variance) = number_moments(expansion);
        let commutator_mag = commutator_magnitude(dist);
        let (s_number, s_phase) = squeezing_parameters(n_variance, phase_variance, commutator_mag);
        Self {
            mean_phase,
            phase_variance,
            phase_variance_closed: phase_variance_closed(expansion),
            n_mean,
            n_variance,
            commutator_mag,
            s_number,
            s_phase,
        }
    }

    /// `ΔΦ² Δn² - |⟨[n, Φ]⟩|²/4`, non-negative up to quadrature error.
    pub fn uncertainty_slack(&self) -> f64 {
        self.phase_variance * self.n_variance - 0.25 * self.commutator_mag * self.commutator_mag
    }
}
