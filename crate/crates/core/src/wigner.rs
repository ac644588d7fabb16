//! Position-space wavefunction and Wigner function of the superposition.
//!
//! Units are `ω = ħ = 1`. The wavefunction uses the position coordinate `q`
//! in which the two components sit at `±√2 α`; the Wigner function uses the
//! quadrature pair `(x, y)` with `q = √2 x`, so its components sit at `±α`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::specfun::{hermite_function, laguerre};
use crate::state::{normalization_constant, StateParams};

/// Evaluates `⟨q|ψ⟩` for one parameter set.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    n: usize,
    shift: f64,
    squeeze: f64,
    eps: Complex64,
    prefactor: f64,
}

impl Wavefunction {
    pub fn new(params: &StateParams) -> Result<Self> {
        let lambda = normalization_constant(params)?;
        // validates the degree
        hermite_function(params.n, 0.0)?;
        Ok(Self {
            n: params.n,
            shift: SQRT_2 * params.alpha,
            squeeze: params.r.exp(),
            eps: Complex64::from_polar(params.eps_mod, params.eps_phase),
            prefactor: lambda * (0.5 * params.r).exp(),
        })
    }

    /// Fock state `|m⟩`.
    pub fn fock(m: usize) -> Result<Self> {
        hermite_function(m, 0.0)?;
        Ok(Self {
            n: m,
            shift: 0.0,
            squeeze: 1.0,
            eps: Complex64::new(0.0, 0.0),
            prefactor: 1.0,
        })
    }

    pub fn eval(&self, q: f64) -> Complex64 {
        let left = hermite_function(self.n, self.squeeze * (q - self.shift)).unwrap_or(0.0);
        let right = if self.eps.norm_sqr() == 0.0 {
            0.0
        } else {
            hermite_function(self.n, self.squeeze * (q + self.shift)).unwrap_or(0.0)
        };
        self.prefactor * (Complex64::new(left, 0.0) + self.eps * right)
    }
}

pub fn wavefunction(params: &StateParams, q: f64) -> Result<Complex64> {
    Ok(Wavefunction::new(params)?.eval(q))
}

/// Rectangle and node counts of a Wigner grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub const DEFAULT_NODES: usize = 201;

    /// Covers four widths of every Gaussian factor.
    pub fn default_for(params: &StateParams) -> Self {
        let xr = params.alpha.abs() + 4.0 * (-params.r).exp().max(1.0);
        let yr = 4.0 * params.r.exp().max(1.0);
        Self {
            x_min: -xr,
            x_max: xr,
            y_min: -yr,
            y_max: yr,
            nx: Self::DEFAULT_NODES,
            ny: Self::DEFAULT_NODES,
        }
    }

    /// Raises `ny` so that the `cos(4yα)` fringes are resolved.
    pub fn with_fringe_floor(mut self, alpha: f64) -> Self {
        let need = (8.0 * (self.y_max - self.y_min) * alpha.abs() / PI).ceil() as usize;
        self.ny = self.ny.max(need).max(2);
        self.nx = self.nx.max(2);
        self
    }

    pub fn x(&self, i: usize) -> f64 {
        node(self.x_min, self.x_max, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        node(self.y_min, self.y_max, self.ny, j)
    }
}

fn node(lo: f64, hi: f64, count: usize, i: usize) -> f64 {
    if count < 2 {
        return lo;
    }
    lo + (hi - lo) * i as f64 / (count - 1) as f64
}

fn trapezoid(values: impl ExactSizeIterator<Item = f64>, h: f64) -> f64 {
    let len = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == len { 0.5 * v } else { v })
        .sum::<f64>()
        * h
}

/// Wigner values on a rectangular grid, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.ny + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.spec.ny..(i + 1) * self.spec.ny]
    }

    fn hx(&self) -> f64 {
        (self.spec.x_max - self.spec.x_min) / (self.spec.nx - 1) as f64
    }

    fn hy(&self) -> f64 {
        (self.spec.y_max - self.spec.y_min) / (self.spec.ny - 1) as f64
    }

    /// Double trapezoidal integral.
    pub fn integral(&self) -> f64 {
        let hy = self.hy();
        let rows: Vec<f64> = (0..self.spec.nx)
            .map(|i| trapezoid(self.row(i).iter().copied(), hy))
            .collect();
        trapezoid(rows.into_iter(), self.hx())
    }
}

/// Closed-form Wigner function evaluator.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    n: usize,
    alpha: f64,
    e2r: f64,
    em2r: f64,
    eps_mod: f64,
    eps_phase: f64,
    prefactor: f64,
}

impl WignerFunction {
    pub fn new(params: &StateParams) -> Result<Self> {
        let lambda = normalization_constant(params)?;
        laguerre(params.n, 0.0)?;
        let sign = if params.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(Self {
            n: params.n,
            alpha: params.alpha,
            e2r: (2.0 * params.r).exp(),
            em2r: (-2.0 * params.r).exp(),
            eps_mod: params.eps_mod,
            eps_phase: params.eps_phase,
            prefactor: 2.0 * sign * lambda * lambda / PI,
        })
    }

    fn gauss_laguerre(&self, u: f64, y: f64) -> f64 {
        let q = y * y * self.em2r + self.e2r * u * u;
        let g = (-2.0 * q).exp();
        if g == 0.0 {
            return 0.0;
        }
        g * laguerre(self.n, 4.0 * q).unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let a = self.alpha;
        let mut s = self.gauss_laguerre(x - a, y);
        if self.eps_mod != 0.0 {
            s += self.eps_mod * self.eps_mod * self.gauss_laguerre(x + a, y);
            s += 2.0 * self.eps_mod * self.gauss_laguerre(x, y) * (4.0 * y * a - self.eps_phase).cos();
        }
        self.prefactor * s
    }
}

/// Evaluates the Wigner function on `spec`, raising `ny` to the fringe floor.
pub fn wigner_grid(params: &StateParams, spec: GridSpec) -> Result<WignerGrid> {
    let w = WignerFunction::new(params)?;
    let spec = spec.with_fringe_floor(params.alpha);
    let values: Vec<f64> = (0..spec.nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = spec.x(i);
            let w = &w;
            (0..spec.ny).map(move |j| w.eval(x, spec.y(j)))
        })
        .collect();
    Ok(WignerGrid { spec, values })
}

/// Position marginal `∫W dy`, returned in the wavefunction coordinate
/// `q = √2 x` as a density per unit `q`, so it compares directly with `|⟨q|ψ⟩|²`.
pub fn x_marginal(grid: &WignerGrid) -> Vec<(f64, f64)> {
    let hy = grid.hy();
    (0..grid.spec.nx)
        .map(|i| {
            let dens_x = trapezoid(grid.row(i).iter().copied(), hy);
            (SQRT_2 * grid.spec.x(i), FRAC_1_SQRT_2 * dens_x)
        })
        .collect()
}
