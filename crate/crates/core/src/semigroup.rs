//! Heat (theta) and Poisson semigroups on the torus.
//!
//! Operators are applied in coefficient space by default: `𝒯ₜ` multiplies
//! mode `n` by `e^{-|n|²t}`, `𝒫ₜ` by `e^{-|n|t}` (`e^{-t|n|}` with the
//! Euclidean norm in `d` dimensions). The kernel-convolution paths are kept as
//! independent cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{
    apply_axis_multiplier, apply_multiplier, circular_convolve, forward_spectrum, modes_of,
    PeriodicGrid, SampledFunction,
};
use crate::quadrature::SubordinationQuadrature;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierKind {
    /// `e^{-n²t}` on a 1-d grid.
    Heat,
    /// `e^{-|n|t}` on a 1-d grid.
    Poisson,
    /// `-|n|²`; ignores `t`.
    Laplacian,
    /// `e^{-t Σ n_j²}`.
    HeatD,
    /// `e^{-t √(Σ n_j²)}`.
    PoissonD,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub t: f64,
}

impl MultiplierSpec {
    pub fn new(kind: MultiplierKind, t: f64) -> Result<Self> {
        if kind != MultiplierKind::Laplacian {
            check_time(t)?;
        }
        Ok(Self { kind, t })
    }

    pub fn symbol(&self, modes: &[i64]) -> f64 {
        let n2: f64 = modes.iter().map(|&n| (n * n) as f64).sum();
        match self.kind {
            MultiplierKind::Heat | MultiplierKind::HeatD => (-n2 * self.t).exp(),
            MultiplierKind::Poisson | MultiplierKind::PoissonD => (-n2.sqrt() * self.t).exp(),
            MultiplierKind::Laplacian => -n2,
        }
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        let one_d = matches!(self.kind, MultiplierKind::Heat | MultiplierKind::Poisson);
        if one_d {
            require_1d(f.grid())?;
        }
        if self.kind != MultiplierKind::Laplacian && self.t == 0.0 {
            return Ok(f.clone());
        }
        Ok(apply_multiplier(f, |n| Complex64::new(self.symbol(n), 0.0)))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

fn require_1d(grid: &PeriodicGrid) -> Result<()> {
    if grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: grid.dims(),
        });
    }
    Ok(())
}

/// `𝒯ₜ f = Σ f̂(n) e^{-n²t} e^{inx}`; `t = 0` returns `f` unchanged.
pub fn theta_evolve(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    MultiplierSpec::new(MultiplierKind::Heat, t)?.apply(f)
}

/// `𝒫ₜ f = Σ f̂(n) e^{-|n|t} e^{inx}`.
pub fn poisson_evolve_multiplier(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    MultiplierSpec::new(MultiplierKind::Poisson, t)?.apply(f)
}

/// `(1/2π)(1 - r²)/(1 - 2r cos x + r²)` with `r = e^{-t}`, sampled.
pub fn poisson_kernel(t: f64, grid: &PeriodicGrid) -> Result<SampledFunction> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    require_1d(grid)?;
    let r = (-t).exp();
    let num = -(-2.0 * t).exp_m1();
    Ok(SampledFunction::from_fn(grid.clone(), |x| {
        let s = (x[0] / 2.0).sin();
        // 1 - 2r cos x + r² written without cancellation
        let den = (1.0 - r).powi(2) + 4.0 * r * s * s;
        num / den / (2.0 * PI)
    }))
}

/// Poisson semigroup as convolution with the closed-form kernel.
pub fn poisson_evolve_kernel(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    require_1d(f.grid())?;
    circular_convolve(f, &poisson_kernel(t, f.grid())?)
}

fn evolve_any_dim(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    if f.grid().dims() == 1 {
        theta_evolve(f, t)
    } else {
        theta_evolve_d(f, t)
    }
}

/// Subordinated semigroup
/// `(1/√π) ∫_0^∞ e^{-u} u^{-1/2} 𝒯_{t²/4u} f du`, integrated numerically
/// with the heat flow applied at every node. Works on grids of any
/// dimension, where it reproduces the multiplier `e^{-t|n|}`.
pub fn subordinate(
    f: &SampledFunction,
    t: f64,
    quad: &SubordinationQuadrature,
) -> Result<SampledFunction> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    quad.validate()?;
    let mean = f.mean();
    let tail = quad.undamped_tail_weight(t);
    let mut out = match quad.integrate(t, |tau| {
        evolve_any_dim(f, tau).expect("evolution time is finite and positive")
    })? {
        Some(integral) => integral.value,
        None => f.scaled(0.0),
    };
    let real = f.is_real();
    let values = out.values().iter().map(|v| v + mean * tail).collect();
    out = SampledFunction::with_values(f.grid().clone(), values, real);
    Ok(out)
}

/// Spectral `Δ` (the generator `d²/dx²` in one dimension).
pub fn generator_apply(f: &SampledFunction) -> SampledFunction {
    apply_multiplier(f, |n| {
        Complex64::new(-n.iter().map(|&m| (m * m) as f64).sum::<f64>(), 0.0)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatResidual {
    pub max_residual: f64,
    /// `(t, ‖∂ₜu - Δu‖_∞)` per time.
    pub per_time: Vec<(f64, f64)>,
    pub step: f64,
    /// Estimated central-difference truncation error at the earliest time.
    pub truncation_estimate: f64,
    pub warnings: Vec<String>,
}

/// Threshold on the truncation estimate above which [`heat_residual`] warns.
pub const RESIDUAL_WARN_LEVEL: f64 = 1e-6;

/// `max_t ‖∂ₜu - Δu‖_∞` for `u(·, t) = 𝒯ₜ f`, with `∂ₜ` a central
/// difference of width `2·step` and `Δ` spectral.
pub fn heat_residual(f: &SampledFunction, times: &[f64], step: f64) -> Result<HeatResidual> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "time grid must be increasing".into(),
        ));
    }
    if !(times[0] - step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "first time {} must exceed the difference step {step}",
            times[0]
        )));
    }
    let mut per_time = Vec::with_capacity(times.len());
    for &t in times {
        let fwd = evolve_any_dim(f, t + step)?;
        let bwd = evolve_any_dim(f, t - step)?;
        let u = evolve_any_dim(f, t)?;
        let lap = generator_apply(&u);
        let dt = fwd.sub(&bwd)?.scaled(0.5 / step);
        per_time.push((t, dt.max_abs_diff(&lap)?));
    }
    let max_residual = per_time.iter().map(|p| p.1).fold(0.0, f64::max);

    // |∂ₜ³u| ≤ Σ |f̂(n)| |n|⁶ e^{-|n|²t}
    let spec = forward_spectrum(f);
    let total = f.len() as f64;
    let t0 = times[0] - step;
    let third: f64 = spec
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n2: f64 = modes_of(f.grid(), i).iter().map(|&m| (m * m) as f64).sum();
            c.norm() / total * n2.powi(3) * (-n2 * t0).exp()
        })
        .sum();
    let truncation_estimate = step * step / 6.0 * third;
    let mut warnings = vec![];
    if truncation_estimate > RESIDUAL_WARN_LEVEL {
        warnings.push(format!(
            "time grid too coarse: truncation estimate {truncation_estimate:.3e} at t = {} \
             exceeds {RESIDUAL_WARN_LEVEL:e}",
            times[0]
        ));
    }
    Ok(HeatResidual {
        max_residual,
        per_time,
        step,
        truncation_estimate,
        warnings,
    })
}

/// Logarithmic grid of `count` times in `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default sample times for [`maximal_function`]: 64 points in `[1e-3, 10]`.
pub fn default_maximal_times() -> Vec<f64> {
    log_times(1e-3, 10.0, 64)
}

/// `max_{t ∈ times} |𝒯ₜ f(x)|`, a lower bound for `sup_{t>0} |𝒯ₜ f(x)|`.
pub fn maximal_function(f: &SampledFunction, times: &[f64]) -> Result<SampledFunction> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time sample".into()));
    }
    let mut best = vec![0.0f64; f.len()];
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        let u = evolve_any_dim(f, t)?;
        for (b, v) in best.iter_mut().zip(u.values()) {
            *b = b.max(v.norm());
        }
    }
    SampledFunction::from_real(f.grid().clone(), best)
}

/// `𝒯ᵈₜ f` by successive 1-d heat multipliers along every axis.
pub fn theta_evolve_d(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    let order: Vec<usize> = (0..f.grid().dims()).collect();
    theta_evolve_d_ordered(f, t, &order)
}

/// [`theta_evolve_d`] with the axes swept in the given order.
pub fn theta_evolve_d_ordered(
    f: &SampledFunction,
    t: f64,
    order: &[usize],
) -> Result<SampledFunction> {
    check_time(t)?;
    let d = f.grid().dims();
    let mut seen = vec![false; d];
    if order.len() != d
        || order
            .iter()
            .any(|&a| a >= d || std::mem::replace(&mut seen[a], true))
    {
        return Err(Error::InvalidArgument(format!(
            "{order:?} is not a permutation of the {d} axes"
        )));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let mut u = f.clone();
    for &axis in order {
        u = apply_axis_multiplier(&u, axis, |n| (-((n * n) as f64) * t).exp());
    }
    Ok(u)
}

/// `d`-dimensional subordinated semigroup, multiplier `e^{-t √(Σ n_j²)}`.
/// For `d = 1` this is the classical Poisson semigroup.
pub fn poisson_evolve_d(f: &SampledFunction, t: f64) -> Result<SampledFunction> {
    MultiplierSpec::new(MultiplierKind::PoissonD, t)?.apply(f)
}

/// The same semigroup obtained by subordinating [`theta_evolve_d`].
pub fn poisson_evolve_d_subordinated(
    f: &SampledFunction,
    t: f64,
    quad: &SubordinationQuadrature,
) -> Result<SampledFunction> {
    subordinate(f, t, quad)
}
