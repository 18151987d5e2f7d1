//! Quadrature for the subordination integral
//!
//! `e^{-λ} = π^{-1/2} ∫_0^∞ e^{-u} u^{-1/2} e^{-λ²/4u} du`.
//!
//! With `u = s²` the weight becomes `(2/√π) e^{-s²} ds` and the heat time at a
//! node is `t²/4s²`. The integral is cut at `s_max = √u_max` above, and at
//! `ε = t / (2√time_cap)` below: on `[0, ε]` every nonzero mode is damped by at
//! least `e^{-time_cap}`, so callers replace that piece by the mean of the
//! integrand times `erf(ε)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::SampledFunction;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Values the subordination integrand can take.
pub trait QuadValue: Clone {
    fn scaled(&self, a: f64) -> Self;
    fn add_scaled(&mut self, a: f64, other: &Self);
    fn distance(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for SampledFunction {
    fn scaled(&self, a: f64) -> Self {
        SampledFunction::scaled(self, a)
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        self.add_scaled_in_place(a, other);
    }
    fn distance(&self, other: &Self) -> f64 {
        self.max_abs_diff(other).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Gauss–Legendre in `s` on `[ε, s_max]`.
    GaussLegendre,
    /// Gauss–Legendre in `v = ln s` on `[ln ε, ln s_max]`.
    LogGaussLegendre,
    /// Bisection of `[ln ε, ln s_max]` into Gauss–Legendre panels until the
    /// panel-halving difference meets the requested error.
    Adaptive,
}

impl std::fmt::Display for QuadratureRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QuadratureRule::GaussLegendre => "gauss-legendre",
            QuadratureRule::LogGaussLegendre => "log-gauss-legendre",
            QuadratureRule::Adaptive => "adaptive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubordinationQuadrature {
    pub rule: QuadratureRule,
    /// Nodes of the rule (per panel for [`QuadratureRule::Adaptive`]).
    pub nodes: usize,
    /// Upper cutoff in `u = s²`.
    pub u_max: f64,
    /// Largest heat time evaluated at a node.
    pub time_cap: f64,
    /// Requested bound on the estimated quadrature error.
    pub tol: f64,
}

impl Default for SubordinationQuadrature {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::LogGaussLegendre,
            nodes: 64,
            u_max: 40.0,
            time_cap: 40.0,
            tol: 1e-8,
        }
    }
}

/// Result of [`SubordinationQuadrature::integrate`].
#[derive(Clone, Debug)]
pub struct Integral<V> {
    pub value: V,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_PANEL_DEPTH: u32 = 30;

impl SubordinationQuadrature {
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            nodes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::InvalidQuadrature(format!(
                "need at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.u_max > 1.0) {
            return Err(Error::InvalidQuadrature(format!(
                "u_max must exceed 1, got {}",
                self.u_max
            )));
        }
        if !(self.time_cap > 0.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidQuadrature(
                "time_cap and tol must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn lower_cutoff(&self, t: f64) -> f64 {
        t / (2.0 * self.time_cap.sqrt())
    }

    pub fn upper_cutoff(&self) -> f64 {
        self.u_max.sqrt()
    }

    /// Weight of the analytically handled pieces `[0, ε] ∪ [s_max, ∞)` for a
    /// mode that is not damped at all.
    pub fn undamped_tail_weight(&self, t: f64) -> f64 {
        let eps = self.lower_cutoff(t).min(self.upper_cutoff());
        libm::erf(eps) + libm::erfc(self.upper_cutoff())
    }

    /// `(2/√π) ∫_ε^{s_max} e^{-s²} g(t²/4s²) ds`, or `None` when the range is
    /// empty (`ε >= s_max`, every mode but the mean is negligible).
    pub fn integrate<V: QuadValue>(
        &self,
        t: f64,
        g: impl Fn(f64) -> V,
    ) -> Result<Option<Integral<V>>> {
        self.validate()?;
        if !(t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        let (eps, smax) = (self.lower_cutoff(t), self.upper_cutoff());
        if eps >= smax {
            return Ok(None);
        }
        let weight = |s: f64| 2.0 / PI.sqrt() * (-s * s).exp();
        let integral = match self.rule {
            QuadratureRule::GaussLegendre => {
                let rule = |n: usize| -> V {
                    let (x, w) = gauss_legendre(n);
                    let (h, mid) = ((smax - eps) / 2.0, (smax + eps) / 2.0);
                    sum_nodes(
                        x.iter().zip(&w).map(|(&xi, &wi)| {
                            let s = mid + h * xi;
                            (wi * h * weight(s), t * t / (4.0 * s * s))
                        }),
                        &g,
                    )
                };
                self.fixed(rule, t)?
            }
            QuadratureRule::LogGaussLegendre => {
                let (a, b) = (eps.ln(), smax.ln());
                let rule = |n: usize| panel(a, b, n, t, &g);
                self.fixed(rule, t)?
            }
            QuadratureRule::Adaptive => {
                let (a, b) = (eps.ln(), smax.ln());
                let mut evaluations = 0;
                let whole = panel(a, b, self.nodes, t, &g);
                evaluations += self.nodes;
                let (value, est) = self.refine(a, b, whole, b - a, 0, t, &g, &mut evaluations);
                if est > self.tol {
                    return Err(self.not_converged(est, t));
                }
                Integral {
                    value,
                    error_estimate: est,
                    evaluations,
                }
            }
        };
        Ok(Some(integral))
    }

    fn fixed<V: QuadValue>(&self, rule: impl Fn(usize) -> V, t: f64) -> Result<Integral<V>> {
        let coarse = rule(self.nodes);
        let fine_n = self.nodes + self.nodes / 2;
        let fine = rule(fine_n);
        let est = coarse.distance(&fine);
        if est > self.tol {
            return Err(self.not_converged(est, t));
        }
        Ok(Integral {
            value: coarse,
            error_estimate: est,
            evaluations: self.nodes + fine_n,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<V: QuadValue>(
        &self,
        a: f64,
        b: f64,
        whole: V,
        total: f64,
        depth: u32,
        t: f64,
        g: &impl Fn(f64) -> V,
        evaluations: &mut usize,
    ) -> (V, f64) {
        let m = 0.5 * (a + b);
        let left = panel(a, m, self.nodes, t, g);
        let right = panel(m, b, self.nodes, t, g);
        *evaluations += 2 * self.nodes;
        let mut halves = left.clone();
        halves.add_scaled(1.0, &right);
        let diff = halves.distance(&whole);
        if diff <= self.tol * (b - a) / total || depth >= MAX_PANEL_DEPTH {
            return (halves, diff);
        }
        let (mut l, el) = self.refine(a, m, left, total, depth + 1, t, g, evaluations);
        let (r, er) = self.refine(m, b, right, total, depth + 1, t, g, evaluations);
        l.add_scaled(1.0, &r);
        (l, el + er)
    }

    fn not_converged(&self, estimate: f64, t: f64) -> Error {
        Error::QuadratureNotConverged {
            estimate,
            requested: self.tol,
            rule: self.rule.to_string(),
            nodes: self.nodes,
            t,
        }
    }
}

/// Gauss–Legendre panel in `v = ln s` over `[a, b]`.
fn panel<V: QuadValue>(a: f64, b: f64, n: usize, t: f64, g: &impl Fn(f64) -> V) -> V {
    let (x, w) = gauss_legendre(n);
    let (h, mid) = ((b - a) / 2.0, (b + a) / 2.0);
    sum_nodes(
        x.iter().zip(&w).map(|(&xi, &wi)| {
            let s = (mid + h * xi).exp();
            (
                wi * h * s * 2.0 / PI.sqrt() * (-s * s).exp(),
                t * t / (4.0 * s * s),
            )
        }),
        g,
    )
}

/// `Σ weight_i · g(time_i)` in node order.
fn sum_nodes<V: QuadValue>(
    mut nodes: impl Iterator<Item = (f64, f64)>,
    g: &impl Fn(f64) -> V,
) -> V {
    let (w0, t0) = nodes.next().expect("at least one node");
    let mut acc = g(t0).scaled(w0);
    for (w, tau) in nodes {
        acc.add_scaled(w, &g(tau));
    }
    acc
}

/// `π^{-1/2} ∫_0^∞ e^{-u} u^{-1/2} e^{-λ²/4u} du`, which equals `e^{-λ}`.
pub fn bochner_scalar(lambda: f64, quad: &SubordinationQuadrature) -> Result<f64> {
    quad.validate()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    Ok(quad
        .integrate(lambda, |tau: f64| (-tau).exp())?
        .map_or(0.0, |i| i.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 16, 64, 96] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            // ∫ x^{2k} = 2/(2k+1) up to degree 2n-1
            for k in 0..n {
                let deg = 2 * k;
                if deg > 2 * n - 1 {
                    break;
                }
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                assert!(
                    (q - 2.0 / (deg + 1) as f64).abs() < 1e-12,
                    "n={n} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn gauss_legendre_known_nodes() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bochner_identity() {
        let quad = SubordinationQuadrature::default();
        for lambda in [0.5, 1.0, 2.0, 5.0] {
            let v = bochner_scalar(lambda, &quad).unwrap();
            let rel = (v / (-lambda).exp() - 1.0).abs();
            assert!(rel < 1e-9, "lambda={lambda} rel={rel}");
        }
        let v = bochner_scalar(1.0, &quad).unwrap();
        assert!((v - 0.367_879_4).abs() < 1e-7);
        assert_eq!(bochner_scalar(0.0, &quad).unwrap(), 1.0);
        assert!(bochner_scalar(-1.0, &quad).is_err());
    }

    #[test]
    fn plain_gauss_legendre_reports_non_convergence() {
        let quad = SubordinationQuadrature {
            rule: QuadratureRule::GaussLegendre,
            nodes: 16,
            ..Default::default()
        };
        match bochner_scalar(0.2, &quad) {
            Err(Error::QuadratureNotConverged { estimate, .. }) => assert!(estimate > quad.tol),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_rule_converges() {
        let quad = SubordinationQuadrature {
            rule: QuadratureRule::Adaptive,
            nodes: 10,
            tol: 1e-12,
            ..Default::default()
        };
        for lambda in [0.3, 1.0, 4.0] {
            let v = bochner_scalar(lambda, &quad).unwrap();
            assert!((v - (-lambda).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn validation() {
        let q = SubordinationQuadrature::with_nodes(4);
        assert!(matches!(q.validate(), Err(Error::InvalidQuadrature(_))));
        let q = SubordinationQuadrature {
            u_max: 0.5,
            ..Default::default()
        };
        assert!(q.validate().is_err());
    }

    #[test]
    fn empty_range_for_huge_time() {
        let quad = SubordinationQuadrature::default();
        assert!(quad
            .integrate(1e3, |tau: f64| (-tau).exp())
            .unwrap()
            .is_none());
    }
}
