//! Orthogonal polynomials and log-space prefactors.
//!
//! The polynomial evaluators run the classical three-term recurrences in
//! plain `f64`. The `*_log_table` variants run the same recurrences with a
//! floating common scale so that high degrees at large arguments stay finite;
//! they are what the coefficient engine consumes.

use std::f64::consts::PI;
use std::ops::{Div, Mul};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest polynomial degree accepted by the evaluators.
pub const MAX_DEGREE: usize = 512;

const RESCALE_ABOVE: f64 = 1e150;

/// A real number stored as `sign * exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    pub sign: i8,
    pub log_magnitude: f64,
}

impl SignedLogValue {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        log_magnitude: 0.0,
    };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    /// `exp(log_magnitude)` with a positive sign.
    pub fn from_log(log_magnitude: f64) -> Self {
        Self::new(1, log_magnitude)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::new(if v > 0.0 { 1 } else { -1 }, v.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Raises to a real power; only defined for non-negative values.
    pub fn powf(self, p: f64) -> Self {
        match self.sign {
            0 if p > 0.0 => Self::ZERO,
            0 => Self::ONE,
            _ => {
                debug_assert!(self.sign > 0, "powf of a negative SignedLogValue");
                Self::new(1, self.log_magnitude * p)
            }
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let sign = if self.sign < 0 && k % 2 != 0 { -1 } else { self.sign };
        Self::new(sign, self.log_magnitude * f64::from(k))
    }
}

impl Mul for SignedLogValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Div for SignedLogValue {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.sign != 0, "division by a zero SignedLogValue");
        Self::new(self.sign * rhs.sign, self.log_magnitude - rhs.log_magnitude)
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        Err(Error::DegreeTooLarge {
            degree: k,
            cap: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// Physicists' Hermite polynomial `H_k(x)`.
pub fn hermite(k: usize, x: f64) -> Result<f64> {
    check_degree(k)?;
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return Ok(prev);
    }
    for i in 1..k {
        let next = 2.0 * x * cur - 2.0 * i as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `G_k(z) = (-i)^k H_k(iz)`, so that `H_k(iz) = i^k G_k(z)`.
pub fn hermite_imag_scaled(k: usize, z: f64) -> Result<f64> {
    check_degree(k)?;
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    if k == 0 {
        return Ok(prev);
    }
    for i in 1..k {
        let next = 2.0 * z * cur + 2.0 * i as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Runs `p_{k+1} = a(k) p_k + b(k) p_{k-1}` from `p_0 = 1`, `p_1 = p1`,
/// keeping the pair rescaled so that nothing overflows.
fn scaled_recurrence_table(
    kmax: usize,
    p1: f64,
    step: impl Fn(usize) -> (f64, f64),
) -> Vec<SignedLogValue> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(SignedLogValue::ONE);
    if kmax == 0 {
        return out;
    }
    let (mut prev, mut cur, mut log_scale) = (1.0_f64, p1, 0.0_f64);
    out.push(SignedLogValue::from_f64(cur));
    for i in 1..kmax {
        let (a, b) = step(i);
        let next = a * cur + b * prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > RESCALE_ABOVE || (big < 1.0 / RESCALE_ABOVE && big > 0.0) {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
        let v = SignedLogValue::from_f64(cur);
        out.push(SignedLogValue::new(v.sign, v.log_magnitude + log_scale));
    }
    out
}

/// `H_0(x)..=H_kmax(x)` in signed-log form.
pub fn hermite_log_table(kmax: usize, x: f64) -> Result<Vec<SignedLogValue>> {
    check_degree(kmax)?;
    Ok(scaled_recurrence_table(kmax, 2.0 * x, |i| {
        (2.0 * x, -2.0 * i as f64)
    }))
}

/// `G_0(z)..=G_kmax(z)` in signed-log form.
pub fn hermite_imag_scaled_log_table(kmax: usize, z: f64) -> Result<Vec<SignedLogValue>> {
    check_degree(kmax)?;
    Ok(scaled_recurrence_table(kmax, 2.0 * z, |i| {
        (2.0 * z, 2.0 * i as f64)
    }))
}

/// Normalized oscillator eigenfunction `H_k(u) e^{-u²/2} / sqrt(2^k k! sqrt(π))`,
/// via the orthonormal recurrence with the Gaussian applied in log space.
pub fn hermite_function(k: usize, u: f64) -> Result<f64> {
    check_degree(k)?;
    let gauss = -0.5 * u * u;
    let mut prev = PI.powf(-0.25);
    if k == 0 {
        return Ok(prev * gauss.exp());
    }
    let mut cur = std::f64::consts::SQRT_2 * u * prev;
    let mut log_scale = gauss;
    for i in 1..k {
        let i = i as f64;
        let next = (2.0 / (i + 1.0)).sqrt() * u * cur - (i / (i + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > RESCALE_ABOVE {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
    }
    if cur == 0.0 {
        return Ok(0.0);
    }
    Ok(cur.signum() * (cur.abs().ln() + log_scale).exp())
}

/// Laguerre polynomial `L_k(x)`.
pub fn laguerre(k: usize, x: f64) -> Result<f64> {
    assoc_laguerre(k, 0, x)
}

/// Associated Laguerre polynomial `L_k^a(x)`, recurrence in `k` at fixed `a`.
pub fn assoc_laguerre(k: usize, a: usize, x: f64) -> Result<f64> {
    check_degree(k)?;
    check_degree(a)?;
    let a = a as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if k == 0 {
        return Ok(prev);
    }
    for i in 1..k {
        let i = i as f64;
        let next = ((2.0 * i + 1.0 + a - x) * cur - (i + a) * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

const LOG_FACTORIAL_TABLE_LEN: usize = 2 * MAX_DEGREE + 2;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..LOG_FACTORIAL_TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(k!)`.
pub fn log_factorial(k: usize) -> f64 {
    let table = log_factorial_table();
    if let Some(&v) = table.get(k) {
        return v;
    }
    let last = table.len() - 1;
    table[last] + ((last + 1)..=k).map(|i| (i as f64).ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite(2, 1.0).unwrap(), 2.0);
        assert_eq!(hermite(3, 2.0).unwrap(), 40.0);
    }

    #[test]
    fn hermite_imag_scaled_examples() {
        assert_eq!(hermite_imag_scaled(0, 0.5).unwrap(), 1.0);
        assert_eq!(hermite_imag_scaled(2, 1.0).unwrap(), 6.0);
        assert_eq!(hermite_imag_scaled(1, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre(0, 7.0).unwrap(), 1.0);
        assert_eq!(laguerre(1, 2.0).unwrap(), -1.0);
        assert_eq!(laguerre(2, 2.0).unwrap(), -1.0);
        assert_eq!(assoc_laguerre(0, 3, 1.5).unwrap(), 1.0);
        assert_eq!(assoc_laguerre(1, 1, 1.0).unwrap(), 1.0);
        assert_eq!(assoc_laguerre(2, 0, 2.0).unwrap(), -1.0);
    }

    #[test]
    fn degree_cap() {
        let err = Error::DegreeTooLarge {
            degree: MAX_DEGREE + 1,
            cap: MAX_DEGREE,
        };
        assert_eq!(hermite(MAX_DEGREE + 1, 0.1), Err(err.clone()));
        assert_eq!(hermite_imag_scaled(MAX_DEGREE + 1, 0.1), Err(err.clone()));
        assert_eq!(laguerre(MAX_DEGREE + 1, 0.1), Err(err.clone()));
        assert_eq!(assoc_laguerre(1, MAX_DEGREE + 1, 0.1), Err(err.clone()));
        assert!(hermite_log_table(MAX_DEGREE + 1, 0.1).is_err());
        assert!(hermite(MAX_DEGREE, 0.1).is_ok());
    }

    #[test]
    fn log_factorial_values() {
        assert_eq!(log_factorial(0), 0.0);
        assert_eq!(log_factorial(1), 0.0);
        assert!(rel_close(log_factorial(5), 120f64.ln(), 1e-14));
        let direct: f64 = (1..=2000).map(|i| (i as f64).ln()).sum();
        assert!(rel_close(log_factorial(2000), direct, 1e-14));
    }

    #[test]
    fn hermite_derivative_identity() {
        for k in 1..=30 {
            for &x in &[-3.1f64, -1.0, -0.2, 0.0, 0.7, 1.9, 4.2] {
                let h = 1e-5 * (x.abs() + 1.0);
                let fd = (hermite(k, x + h).unwrap() - hermite(k, x - h).unwrap()) / (2.0 * h);
                let exact = 2.0 * k as f64 * hermite(k - 1, x).unwrap();
                let scale = exact.abs().max(hermite(k, x).unwrap().abs()).max(1.0);
                assert!((fd - exact).abs() <= 1e-6 * scale, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn imag_scaled_matches_complex_hermite() {
        for k in 0..=30usize {
            for &z in &[-2.5f64, -0.3, 0.0, 0.4, 1.0, 3.3] {
                let iz = Complex64::new(0.0, z);
                let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), 2.0 * iz);
                let hk = if k == 0 {
                    prev
                } else {
                    for i in 1..k {
                        let next = 2.0 * iz * cur - 2.0 * i as f64 * prev;
                        prev = cur;
                        cur = next;
                    }
                    cur
                };
                let ik = Complex64::i().powu(k as u32);
                let rebuilt = ik * hermite_imag_scaled(k, z).unwrap();
                let scale = hk.norm().max(1.0);
                assert!((rebuilt.re - hk.re).abs() <= 1e-10 * scale, "k={k} z={z}");
                assert!((rebuilt.im - hk.im).abs() <= 1e-10 * scale, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn laguerre_at_origin() {
        for k in 0..=60 {
            assert_eq!(laguerre(k, 0.0).unwrap(), 1.0);
            for a in 0..=6 {
                let binom = (log_factorial(k + a) - log_factorial(k) - log_factorial(a)).exp();
                assert!(rel_close(assoc_laguerre(k, a, 0.0).unwrap(), binom, 1e-12));
            }
        }
    }

    #[test]
    fn log_tables_agree_with_plain_recurrence() {
        for &x in &[-2.0f64, 0.0, 0.3, 1.7, 5.0] {
            let t = hermite_log_table(40, x).unwrap();
            let g = hermite_imag_scaled_log_table(40, x).unwrap();
            for k in 0..=40 {
                let h = hermite(k, x).unwrap();
                assert!(rel_close(t[k].to_f64(), h, 1e-12) || (h.abs() < 1e-9 && t[k].to_f64().abs() < 1e-9));
                assert!(rel_close(g[k].to_f64(), hermite_imag_scaled(k, x).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn hermite_function_matches_direct_form() {
        for k in 0..=25usize {
            for &u in &[-4.0f64, -1.3, 0.0, 0.6, 2.2, 5.0] {
                let direct = hermite(k, u).unwrap() * (-0.5 * u * u).exp()
                    / ((k as f64) * 2f64.ln() + log_factorial(k) + 0.5 * PI.ln()).mul_add(0.5, 0.0).exp();
                let v = hermite_function(k, u).unwrap();
                assert!((v - direct).abs() < 1e-12, "k={k} u={u}: {v} vs {direct}");
            }
        }
        // large degree deep in the classically forbidden region stays finite
        let v = hermite_function(400, 45.0).unwrap();
        assert!(v.is_finite() && v.abs() < 1e-100);
    }

    #[test]
    fn log_table_survives_overflow_range() {
        // H_k(x) ~ (2x)^k for x >> k
        let x = 1.0e5;
        let t = hermite_log_table(400, x).unwrap();
        assert!(!hermite(400, x).unwrap().is_finite());
        let lead = 400.0 * (2.0 * x).ln();
        assert!((t[400].log_magnitude - lead).abs() < 1e-3);
        assert_eq!(t[400].sign, 1);
    }

    proptest! {
        #[test]
        fn signed_log_round_trip(mant in 1.0f64..10.0, exp10 in -25i32..25, neg in any::<bool>()) {
            // ln|v| carries an absolute rounding error ~|ln v|*eps, so the
            // 1e-14 relative round trip only holds for moderate magnitudes.
            let v = if neg { -mant } else { mant } * 10f64.powi(exp10);
            let back = SignedLogValue::from_f64(v).to_f64();
            prop_assert!(rel_close(back, v, 1e-14));
        }

        #[test]
        fn signed_log_product(a in -1e10f64..1e10, b in -1e10f64..1e10) {
            prop_assume!(a != 0.0 && b != 0.0);
            let p = SignedLogValue::from_f64(a) * SignedLogValue::from_f64(b);
            let q = SignedLogValue::from_f64(a) / SignedLogValue::from_f64(b);
            prop_assert!(rel_close(p.to_f64(), a * b, 1e-13));
            prop_assert!(rel_close(q.to_f64(), a / b, 1e-13));
        }
    }
}
