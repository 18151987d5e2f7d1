//! The third Jacobi theta function and the heat kernel on the torus.
//!
//! `θ₃(x, q) = 1 + 2 Σ_{n≥1} q^{n²} cos(nx)
//!           = Π_{n≥1} (1 + 2q^{2n-1} cos x + q^{4n-2}) (1 - q^{2n})`
//!
//! and `K_t(x) = θ₃(x, e^{-t}) / 2π`. Only real nomes `0 <= q < 1` are handled.
//!
//! The series stops at the first `n` with `2q^{n²} < tol`; the neglected tail
//! is then at most `tol / (1 - q)`. Convergence degrades as `q → 1` (small
//! `t`), which is why [`kernel`] refuses `t < MIN_KERNEL_TIME`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::{PeriodicGrid, SampledFunction};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

/// Smallest diffusion time for which [`kernel`] samples `K_t`.
pub const MIN_KERNEL_TIME: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaParams {
    q: f64,
    tol: f64,
    max_terms: usize,
}

impl ThetaParams {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::NomeOutOfRange(q));
        }
        Ok(Self {
            q,
            tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    /// Nome `q = e^{-t}` for diffusion time `t > 0`.
    pub fn from_time(t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        Self::new((-t).exp())
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidTolerance(tol));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms.max(1);
        self
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Diffusion time `t = -ln q` (`inf` for `q = 0`).
    pub fn time(&self) -> f64 {
        -self.q.ln()
    }

    /// Imaginary part of the modular parameter `τ = it/π` with `q = e^{iπτ}`.
    pub fn tau_imag(&self) -> f64 {
        self.time() / PI
    }

    /// `q^m` computed as `exp(m ln q)`.
    fn qpow(&self, m: f64) -> f64 {
        if self.q == 0.0 {
            0.0
        } else {
            (m * self.q.ln()).exp()
        }
    }

    /// Number of series terms kept by [`theta3_series`].
    pub fn series_terms(&self) -> usize {
        let mut n = 1usize;
        while n <= self.max_terms && 2.0 * self.qpow((n * n) as f64) >= self.tol {
            n += 1;
        }
        n - 1
    }
}

/// Reduces `x` to `[0, π]`, using evenness and `2π` periodicity.
fn reduce(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    (x - two_pi * (x / two_pi).round()).abs()
}

pub fn theta3_series(x: f64, p: &ThetaParams) -> f64 {
    let x = reduce(x);
    let terms = p.series_terms();
    // smallest terms first
    let mut s = 0.0;
    for n in (1..=terms).rev() {
        s += p.qpow((n * n) as f64) * (n as f64 * x).cos();
    }
    1.0 + 2.0 * s
}

/// Factor pairs `(1 + 2q^{2n-1} cos x + q^{4n-2}, 1 - q^{2n})` of the triple
/// product, `n = 1, 2, …`, until both differ from 1 by less than `tol`.
///
/// The first factor is evaluated as `(1 + q^{2n-1} cos x)² + (q^{2n-1} sin x)²`
/// which is nonnegative in floating point as well.
pub fn product_factors(x: f64, p: &ThetaParams) -> impl Iterator<Item = (f64, f64)> + '_ {
    let x = reduce(x);
    let (s, c) = x.sin_cos();
    let lnq = if p.q == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.q.ln()
    };
    (1..=p.max_terms)
        .map(move |n| {
            let odd = ((2 * n - 1) as f64 * lnq).exp();
            let a = (1.0 + odd * c).powi(2) + (odd * s).powi(2);
            let b = -(2.0 * n as f64 * lnq).exp_m1();
            (a, b)
        })
        .take_while(move |&(a, b)| (1.0 - a).abs() >= p.tol || (1.0 - b).abs() >= p.tol)
}

pub fn theta3_product(x: f64, p: &ThetaParams) -> f64 {
    product_factors(x, p).map(|(a, b)| a * b).product()
}

/// `θ₃(0, q) = sup_x |θ₃(x, q)|`.
pub fn theta3_bound(p: &ThetaParams) -> f64 {
    theta3_series(0.0, p)
}

/// `K_t(x) = (2π)^{-d} Π_i θ₃(x_i, e^{-t})` sampled on the grid.
pub fn kernel(t: f64, grid: &PeriodicGrid) -> Result<SampledFunction> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if t < MIN_KERNEL_TIME {
        return Err(Error::KernelTimeTooSmall {
            t,
            min: MIN_KERNEL_TIME,
        });
    }
    let p = ThetaParams::from_time(t)?;
    // one table per axis, reused across the tensor product
    let tables: Vec<Vec<f64>> = (0..grid.dims())
        .map(|a| {
            grid.axis_points(a)
                .iter()
                .map(|&x| theta3_series(x, &p) / (2.0 * PI))
                .collect()
        })
        .collect();
    let values = (0..grid.len())
        .map(|i| {
            grid.unravel(i)
                .iter()
                .enumerate()
                .map(|(a, &j)| tables[a][j])
                .product()
        })
        .collect();
    SampledFunction::from_real(grid.clone(), values)
}

/// `∫_{a<|x|<=π} K_t(x) dx`, the kernel mass outside `(-a, a)`, from the
/// termwise integrated series `a/π + (2/π) Σ e^{-n²t} sin(na)/n`.
pub fn kernel_mass_outside(t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if !(a > 0.0 && a <= PI) {
        return Err(Error::InvalidArgument(format!(
            "radius {a} must lie in (0, π]"
        )));
    }
    let mut terms = vec![];
    for n in 1..=DEFAULT_MAX_TERMS {
        let w = (-((n * n) as f64) * t).exp() / n as f64;
        if w < 1e-18 {
            break;
        }
        terms.push(w * (n as f64 * a).sin());
    }
    let tail: f64 = terms.iter().rev().sum();
    Ok(1.0 - a / PI - 2.0 / PI * tail)
}
