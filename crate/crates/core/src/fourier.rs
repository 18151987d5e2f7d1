//! Periodic grids, sampled functions and the discrete Fourier machinery shared
//! by every operator in the crate.
//!
//! Conventions:
//!
//! * grid nodes sit at `x_j = 2πj/N`, `j = 0..N-1`, so every integral over the
//!   torus is the trapezoid rule (exact for band-limited integrands);
//! * analysis is `f̂(n) = (1/2π)∫ f(y) e^{-iny} dy`, synthesis is
//!   `Σ f̂(n) e^{inx}` with no `1/2π`;
//! * multi-dimensional values are stored in lexicographic order with the first
//!   axis varying slowest.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::coeffs::CoefficientSequence;
use crate::error::{Error, Result};

/// Relative threshold on imaginary parts for values tagged [`ValueKind::Real`].
pub const REAL_IMAG_TOL: f64 = 1e-10;

/// Uniform node-centred sampling of `[0, 2π)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    sizes: Vec<usize>,
}

impl PeriodicGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "grid needs at least one axis".into(),
            ));
        }
        for &n in &sizes {
            if n < 4 || n % 2 != 0 {
                return Err(Error::GridUnderresolved { size: n });
            }
        }
        Ok(Self { sizes })
    }

    pub fn one_d(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `d` axes with `n` points each.
    pub fn cube(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.sizes[axis] as f64
    }

    /// Volume element of one grid cell, `Π 2π/N_i`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    pub fn axis_points(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.sizes[axis]).map(|j| j as f64 * h).collect()
    }

    /// Per-axis indices of the flat (lexicographic) index.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for a in (0..self.dims()).rev() {
            idx[a] = flat % self.sizes[a];
            flat /= self.sizes[a];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &j)| j as f64 * self.spacing(a))
            .collect()
    }

    fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                left: self.sizes.clone(),
                right: other.sizes.clone(),
            });
        }
        Ok(())
    }
}

/// Signed mode number of FFT bin `k` on an axis of `n` points. The Nyquist
/// bin `n/2` maps to `-n/2`.
pub fn mode_number(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Real,
    Complex,
}

/// Values of a function on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: PeriodicGrid,
    values: Vec<Complex64>,
    kind: ValueKind,
}

impl SampledFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<Complex64>, kind: ValueKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        let mut f = Self { grid, values, kind };
        if kind == ValueKind::Real {
            let scale = f.values.iter().map(|v| v.re.abs()).fold(1.0, f64::max);
            if f.values.iter().any(|v| v.im.abs() > REAL_IMAG_TOL * scale) {
                return Err(Error::InvalidArgument(
                    "values tagged real carry imaginary parts".into(),
                ));
            }
            f.values.iter_mut().for_each(|v| v.im = 0.0);
        }
        Ok(f)
    }

    pub fn from_real(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        let values = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::new(grid, values, ValueKind::Real)
    }

    /// Samples a real function of the grid coordinates.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| Complex64::new(f(&grid.point(i)), 0.0))
            .collect();
        Self {
            grid,
            values,
            kind: ValueKind::Real,
        }
    }

    pub fn from_fn_complex(grid: PeriodicGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self {
            grid,
            values,
            kind: ValueKind::Complex,
        }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Builds a result on the same grid, keeping the real tag when `real`
    /// holds and dropping the imaginary round-off.
    pub(crate) fn with_values(grid: PeriodicGrid, mut values: Vec<Complex64>, real: bool) -> Self {
        let kind = if real {
            values.iter_mut().for_each(|v| v.im = 0.0);
            ValueKind::Real
        } else {
            ValueKind::Complex
        };
        Self { grid, values, kind }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == ValueKind::Real
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete mean, i.e. `(2π)^{-d} ∫ f`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// Trapezoid-rule integral over the torus.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    /// `∫ f·conj(g)` by the trapezoid rule.
    pub fn inner(&self, g: &SampledFunction) -> Result<Complex64> {
        self.grid.check_same(&g.grid)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn max_abs_diff(&self, g: &SampledFunction) -> Result<f64> {
        self.grid.check_same(&g.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn min_real(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self {
            grid: self.grid.clone(),
            values,
            kind: ValueKind::Complex,
        }
    }

    pub fn scaled(&self, a: f64) -> SampledFunction {
        let values = self.values.iter().map(|v| v * a).collect();
        Self {
            grid: self.grid.clone(),
            values,
            kind: self.kind,
        }
    }

    pub fn sub(&self, g: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(&g.grid)?;
        let values = self
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::with_values(
            self.grid.clone(),
            values,
            self.is_real() && g.is_real(),
        ))
    }

    pub(crate) fn add_scaled_in_place(&mut self, a: f64, g: &SampledFunction) {
        debug_assert_eq!(self.grid, g.grid);
        for (v, w) in self.values.iter_mut().zip(&g.values) {
            *v += w * a;
        }
        if g.kind == ValueKind::Complex {
            self.kind = ValueKind::Complex;
        }
    }
}

fn fft_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, inverse: bool) {
    let n = sizes[axis];
    let stride: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * n * stride + i;
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[base + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[base + k * stride] = *v;
            }
        }
    }
}

/// Unnormalised forward DFT over every axis.
pub(crate) fn forward_spectrum(f: &SampledFunction) -> Vec<Complex64> {
    let mut data = f.values.clone();
    for axis in 0..f.grid.dims() {
        fft_axis(&mut data, f.grid.sizes(), axis, false);
    }
    data
}

/// Inverse of [`forward_spectrum`], including the `1/Π N_i` factor.
pub(crate) fn inverse_spectrum(grid: &PeriodicGrid, mut data: Vec<Complex64>) -> Vec<Complex64> {
    for axis in 0..grid.dims() {
        fft_axis(&mut data, grid.sizes(), axis, true);
    }
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Signed mode vector of every spectrum slot.
pub(crate) fn modes_of(grid: &PeriodicGrid, flat: usize) -> Vec<i64> {
    grid.unravel(flat)
        .iter()
        .zip(grid.sizes())
        .map(|(&k, &n)| mode_number(k, n))
        .collect()
}

/// Evaluates `symbol` on the modes of one spectrum slot. On Nyquist bins,
/// where `±N/2` alias, the symbol is averaged over both signs so odd symbols
/// (odd derivatives) vanish there and even ones are unaffected.
fn slot_symbol(
    grid: &PeriodicGrid,
    modes: &[i64],
    symbol: &impl Fn(&[i64]) -> Complex64,
) -> Complex64 {
    let nyquist: Vec<usize> = (0..modes.len())
        .filter(|&a| modes[a] == -(grid.sizes()[a] as i64) / 2)
        .collect();
    if nyquist.is_empty() {
        return symbol(modes);
    }
    let mut m = modes.to_vec();
    let combos = 1usize << nyquist.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for mask in 0..combos {
        for (bit, &a) in nyquist.iter().enumerate() {
            m[a] = if mask >> bit & 1 == 1 {
                -modes[a]
            } else {
                modes[a]
            };
        }
        acc += symbol(&m);
    }
    acc / combos as f64
}

/// Applies the Fourier multiplier `symbol(n)` (`n` the signed mode vector).
///
/// The output keeps the real tag when the input is real; every symbol used in
/// this crate is Hermitian (`m(-n) = conj m(n)`) so the imaginary round-off
/// is dropped in that case.
pub fn apply_multiplier(
    f: &SampledFunction,
    symbol: impl Fn(&[i64]) -> Complex64,
) -> SampledFunction {
    let grid = f.grid.clone();
    let mut spec = forward_spectrum(f);
    for (flat, v) in spec.iter_mut().enumerate() {
        let modes = modes_of(&grid, flat);
        *v *= slot_symbol(&grid, &modes, &symbol);
    }
    let values = inverse_spectrum(&grid, spec);
    SampledFunction::with_values(grid, values, f.is_real())
}

/// Real even multiplier applied along a single axis.
pub(crate) fn apply_axis_multiplier(
    f: &SampledFunction,
    axis: usize,
    symbol: impl Fn(i64) -> f64,
) -> SampledFunction {
    let grid = f.grid.clone();
    let sizes = grid.sizes().to_vec();
    let n = sizes[axis];
    let stride: usize = sizes[axis + 1..].iter().product();
    let mut data = f.values.clone();
    fft_axis(&mut data, &sizes, axis, false);
    let factors: Vec<f64> = (0..n).map(|k| symbol(mode_number(k, n))).collect();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= factors[(i / stride) % n] / n as f64;
    }
    fft_axis(&mut data, &sizes, axis, true);
    SampledFunction::with_values(grid, data, f.is_real())
}

/// Fourier coefficients of a 1-d sampled function, modes `|n| <= N/2 - 1`.
///
/// Warning: the Nyquist mode `n = ±N/2` is ambiguous on the grid and is
/// dropped, so a function with Nyquist content does not round-trip through
/// `synthesize(analyze(f))`.
pub fn analyze(f: &SampledFunction) -> Result<CoefficientSequence> {
    if f.grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: f.grid.dims(),
        });
    }
    let n = f.grid.sizes()[0];
    let spec = forward_spectrum(f);
    let half = n / 2 - 1;
    let coeffs = (-(half as i64)..=half as i64)
        .map(|m| spec[m.rem_euclid(n as i64) as usize] / n as f64)
        .collect();
    CoefficientSequence::new(half, coeffs)
}

/// Evaluates `Σ c_n e^{inx}` on the grid nodes.
///
/// Stored modes beyond the window of a sequence that carries a rule are
/// evaluated out to `N/2 - 1` (a truncation of the infinite series).
pub fn synthesize(c: &CoefficientSequence, grid: &PeriodicGrid) -> Result<SampledFunction> {
    if grid.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: grid.dims(),
        });
    }
    let n = grid.sizes()[0];
    let needed = 2 * c.halfwidth() + 2;
    if n < needed {
        return Err(Error::Aliasing {
            halfwidth: c.halfwidth(),
            needed,
            size: n,
        });
    }
    let top = if c.rule().is_some() {
        n / 2 - 1
    } else {
        c.halfwidth()
    };
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for m in -(top as i64)..=top as i64 {
        spec[m.rem_euclid(n as i64) as usize] = c.get(m) * n as f64;
    }
    let values = inverse_spectrum(grid, spec);
    let real = c.is_conjugate_symmetric(1e-14);
    Ok(SampledFunction::with_values(grid.clone(), values, real))
}

/// `(f⋆g)(x) = ∫ f(y) g(x-y) dy` on the torus, as a circular convolution
/// scaled by the cell volume. Coefficientwise this is `(2π)^d f̂(n) ĝ(n)`.
pub fn circular_convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    f.grid.check_same(&g.grid)?;
    let a = forward_spectrum(f);
    let b = forward_spectrum(g);
    let spec = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    let mut values = inverse_spectrum(&f.grid, spec);
    let h = f.grid.cell_volume();
    values.iter_mut().for_each(|v| *v *= h);
    Ok(SampledFunction::with_values(
        f.grid.clone(),
        values,
        f.is_real() && g.is_real(),
    ))
}

/// Direct `O(N²)` transforms, kept as independent references for tests.
pub mod reference {
    use super::*;

    pub fn dft(f: &SampledFunction) -> Result<CoefficientSequence> {
        if f.grid.dims() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: f.grid.dims(),
            });
        }
        let n = f.grid.sizes()[0];
        let half = n / 2 - 1;
        let coeffs = (-(half as i64)..=half as i64)
            .map(|m| {
                let s: Complex64 = f
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let phase =
                            -2.0 * PI * ((m * j as i64).rem_euclid(n as i64)) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, phase)
                    })
                    .sum();
                s / n as f64
            })
            .collect();
        CoefficientSequence::new(half, coeffs)
    }

    pub fn convolve(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
        f.grid.check_same(&g.grid)?;
        if f.grid.dims() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: f.grid.dims(),
            });
        }
        let n = f.len();
        let h = f.grid.cell_volume();
        let values = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| f.values[j] * g.values[(i + n - j) % n])
                    .sum::<Complex64>()
                    * h
            })
            .collect();
        Ok(SampledFunction::with_values(
            f.grid.clone(),
            values,
            f.is_real() && g.is_real(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::one_d(n).unwrap()
    }

    #[test]
    fn grid_rejects_small_or_odd_sizes() {
        assert!(matches!(
            PeriodicGrid::one_d(2),
            Err(Error::GridUnderresolved { size: 2 })
        ));
        assert!(PeriodicGrid::one_d(7).is_err());
        assert!(PeriodicGrid::new(vec![8, 6]).is_ok());
        assert!(PeriodicGrid::new(vec![]).is_err());
    }

    #[test]
    fn lexicographic_layout() {
        let g = PeriodicGrid::new(vec![4, 6]).unwrap();
        assert_eq!(g.unravel(7), vec![1, 1]);
        let p = g.point(7);
        assert!((p[0] - PI / 2.0).abs() < 1e-15 && (p[1] - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn analyze_constant() {
        let f = SampledFunction::constant(grid(8), 1.0);
        let c = analyze(&f).unwrap();
        assert_eq!(c.halfwidth(), 3);
        for n in -3..=3 {
            let expect = if n == 0 { 1.0 } else { 0.0 };
            assert!((c.get(n) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn analyze_single_mode() {
        let f = SampledFunction::from_fn(grid(16), |x| (2.0 * x[0]).cos());
        let c = analyze(&f).unwrap();
        for n in -7i64..=7 {
            let expect = if n.abs() == 2 { 0.5 } else { 0.0 };
            assert!((c.get(n) - expect).norm() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn analyze_rejects_2d() {
        let f = SampledFunction::constant(PeriodicGrid::cube(2, 8).unwrap(), 1.0);
        assert!(matches!(analyze(&f), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn synthesize_simple_sequences() {
        let one = CoefficientSequence::new(0, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let f = synthesize(&one, &grid(8)).unwrap();
        assert!(f.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        assert!(f.is_real());

        let cos = CoefficientSequence::from_fn(1, |n| {
            Complex64::new(if n == 0 { 0.0 } else { 0.5 }, 0.0)
        });
        let g = synthesize(&cos, &grid(16)).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            let x = 2.0 * PI * i as f64 / 16.0;
            assert!((v.re - x.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn synthesize_aliasing_error() {
        let c = CoefficientSequence::from_fn(4, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            synthesize(&c, &grid(8)),
            Err(Error::Aliasing { needed: 10, .. })
        ));
        assert!(synthesize(&c, &grid(10)).is_ok());
    }

    #[test]
    fn fast_and_direct_transforms_agree() {
        let f = SampledFunction::from_fn(grid(32), |x| (x[0].sin() * 3.0).exp());
        let a = analyze(&f).unwrap();
        let b = reference::dft(&f).unwrap();
        for n in -15..=15 {
            assert!((a.get(n) - b.get(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn convolution_with_delta_is_identity() {
        let g = grid(32);
        let f = SampledFunction::from_fn(g.clone(), |x| x[0].sin() + 0.3 * (5.0 * x[0]).cos());
        let mut d = vec![0.0; 32];
        d[0] = 1.0 / g.spacing(0);
        let delta = SampledFunction::from_real(g, d).unwrap();
        let h = circular_convolve(&f, &delta).unwrap();
        assert!(h.max_abs_diff(&f).unwrap() < 1e-14);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let g = grid(64);
        let f = SampledFunction::from_fn(g.clone(), |x| (x[0].cos()).exp());
        let k = SampledFunction::from_fn(g, |x| 1.0 / (2.0 - x[0].sin()));
        let fast = circular_convolve(&f, &k).unwrap();
        let slow = reference::convolve(&f, &k).unwrap();
        assert!(fast.max_abs_diff(&slow).unwrap() < 1e-10);
    }

    #[test]
    fn convolution_grid_mismatch() {
        let f = SampledFunction::constant(grid(8), 1.0);
        let g = SampledFunction::constant(grid(16), 1.0);
        assert!(matches!(
            circular_convolve(&f, &g),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn nyquist_average_kills_odd_symbol() {
        // alternating sequence is pure Nyquist; d/dx of it must vanish
        let f = SampledFunction::from_fn(grid(8), |x| (4.0 * x[0]).cos());
        let d = apply_multiplier(&f, |n| Complex64::new(0.0, n[0] as f64));
        assert!(d.lp_norm(f64::INFINITY) < 1e-14);
        let d2 = apply_multiplier(&f, |n| Complex64::new(-(n[0] * n[0]) as f64, 0.0));
        assert!(d2.max_abs_diff(&f.scaled(-16.0)).unwrap() < 1e-12);
    }

    #[test]
    fn real_tag_rejects_imaginary_values() {
        let v = vec![Complex64::new(1.0, 0.5); 8];
        assert!(SampledFunction::new(grid(8), v, ValueKind::Real).is_err());
    }

    #[test]
    fn norms_of_constant() {
        let f = SampledFunction::constant(grid(16), 2.0);
        assert!((f.lp_norm(1.0) - 4.0 * PI).abs() < 1e-13);
        assert!((f.lp_norm(2.0) - (8.0 * PI).sqrt()).abs() < 1e-13);
        assert_eq!(f.lp_norm(f64::INFINITY), 2.0);
    }
}
