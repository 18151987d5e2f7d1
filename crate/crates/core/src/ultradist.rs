//! Periodic ultra-distributions as coefficient sequences.
//!
//! A distribution `F = Σ F_n e^{inx}` is stored as a finite window plus an
//! optional [`Rule`] for the modes beyond it. Growth is measured against the
//! classes
//!
//! * test: `|f̂_n| <= c q^{|n|^k}`, `0 < q < 1`;
//! * dual: `|F_n| <= c p^{|n|^k}`, `p > 1`;
//!
//! and the duality pairing is `<F, f> = 2π Σ f̂_n conj(F_n)`, which converges
//! whenever `pq < 1` for classes of the same order.
//!
//! Every infinite sum is evaluated in log-magnitude for rule-driven modes and
//! summed in the fixed order `0, ±1, ±2, …`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSequence, Rule};
use crate::error::{Error, Result};
use crate::fourier::{analyze, circular_convolve, synthesize, PeriodicGrid};
use crate::theta::kernel;

/// Cap on the number of modes any infinite sum or scan may visit.
pub const MAX_TERMS: usize = 1_000_000;

/// Default truncation tolerance for pairings.
pub const DEFAULT_PAIR_TOL: f64 = 1e-15;

/// Margin added to the smoothing time so membership at the threshold is strict.
pub const SMOOTHING_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    /// `|f̂_n| <= c q^{|n|^k}` with `q < 1`.
    Test,
    /// `|F_n| <= c p^{|n|^k}` with `p > 1`.
    Dual,
}

impl std::str::FromStr for ClassKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(ClassKind::Test),
            "dual" => Ok(ClassKind::Dual),
            other => Err(Error::InvalidArgument(format!(
                "unknown class kind {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthClass {
    pub kind: ClassKind,
    pub base: f64,
    #[serde(rename = "k")]
    pub order: u32,
    #[serde(rename = "c")]
    pub constant: f64,
}

impl GrowthClass {
    pub fn new(kind: ClassKind, base: f64, order: u32, constant: f64) -> Result<Self> {
        let g = Self {
            kind,
            base,
            order,
            constant,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn test(q: f64, k: u32, c: f64) -> Result<Self> {
        Self::new(ClassKind::Test, q, k, c)
    }

    pub fn dual(p: f64, k: u32, c: f64) -> Result<Self> {
        Self::new(ClassKind::Dual, p, k, c)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ClassKind::Test if !(self.base > 0.0 && self.base < 1.0) => {
                return Err(Error::InvalidClass(format!(
                    "test class needs 0 < q < 1, got {}",
                    self.base
                )))
            }
            ClassKind::Dual if !(self.base > 1.0 && self.base.is_finite()) => {
                return Err(Error::InvalidClass(format!(
                    "dual class needs p > 1, got {}",
                    self.base
                )))
            }
            _ => {}
        }
        if self.order < 1 {
            return Err(Error::InvalidClass("order k must be >= 1".into()));
        }
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            return Err(Error::InvalidClass(format!(
                "constant must be positive, got {}",
                self.constant
            )));
        }
        Ok(())
    }

    /// `ln(c · base^{|n|^k})`.
    pub fn ln_bound(&self, n: i64) -> f64 {
        let m = n.unsigned_abs() as f64;
        self.constant.ln() + m.powi(self.order as i32) * self.base.ln()
    }

    /// Decay rate `α = ln(1/q)` of a test class.
    pub fn alpha(&self) -> f64 {
        -self.base.ln()
    }
}

/// A periodic ultra-distribution: coefficients plus an optional declared class.
#[derive(Clone, Debug, PartialEq)]
pub struct UltraDistribution {
    coeffs: CoefficientSequence,
    declared_class: Option<GrowthClass>,
}

impl UltraDistribution {
    /// Fails when the declared class is violated on the stored window.
    pub fn new(coeffs: CoefficientSequence, declared_class: Option<GrowthClass>) -> Result<Self> {
        if let Some(rule) = coeffs.rule() {
            rule.validate()?;
        }
        if let Some(g) = &declared_class {
            g.validate()?;
            let window = coeffs.clone().without_rule();
            let m = check_membership(&window, g);
            if !m.member {
                return Err(Error::InvalidClass(format!(
                    "declared class violated at n = {} (ratio {:.6})",
                    m.witness_index, m.witness_ratio
                )));
            }
        }
        Ok(Self {
            coeffs,
            declared_class,
        })
    }

    pub fn from_coeffs(coeffs: CoefficientSequence) -> Self {
        Self {
            coeffs,
            declared_class: None,
        }
    }

    /// The periodic Dirac comb analogue, `F_n = 1` for all `n`.
    pub fn comb(halfwidth: usize) -> Self {
        Self::from_coeffs(
            CoefficientSequence::from_rule(halfwidth, Rule::power(1.0, 1))
                .expect("valid comb rule"),
        )
    }

    pub fn coeffs(&self) -> &CoefficientSequence {
        &self.coeffs
    }

    pub fn declared_class(&self) -> Option<&GrowthClass> {
        self.declared_class.as_ref()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// First violating index in the order `0, 1, -1, 2, -2, …`; for a
    /// member, the index with the largest ratio.
    pub witness_index: i64,
    /// `|F_n| / (c · base^{|n|^k})` at the witness.
    pub witness_ratio: f64,
    /// Largest `|n|` examined numerically.
    pub scanned_to: usize,
}

/// Leading behaviour of `Σ a_j |n|^{k_j}`: the largest power with a nonzero
/// coefficient, or `None` when everything cancels.
fn leading(terms: &[(u32, f64)]) -> Option<(u32, f64)> {
    let mut powers: Vec<u32> = terms.iter().map(|t| t.0).collect();
    powers.sort_unstable();
    powers.dedup();
    powers.into_iter().rev().find_map(|k| {
        let a: f64 = terms.iter().filter(|t| t.0 == k).map(|t| t.1).sum();
        (a.abs() > 1e-300).then_some((k, a))
    })
}

fn rule_derivative(rule: &Rule) -> u32 {
    let Rule::Power { derivative, .. } = *rule;
    derivative
}

/// Relative slack for round-off at equality, e.g. `|f̂_n| = c q^{|n|^k}` exactly.
const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Whether `|c_n| <= c · base^{|n|^k}` for every `n`.
///
/// The window (and, for sequences with a rule, modes out to
/// `max(256, 2·window)`) is scanned in log-magnitude; beyond that the rule's
/// leading growth is compared with the class analytically and, on violation,
/// the first offending index is searched up to [`MAX_TERMS`].
pub fn check_membership(c: &CoefficientSequence, g: &GrowthClass) -> Membership {
    let scan = if c.rule().is_some() {
        (2 * c.halfwidth()).clamp(256, MAX_TERMS)
    } else {
        c.halfwidth()
    };
    let mut worst = (0i64, f64::NEG_INFINITY);
    let mut first_violation = None;
    let order = (0..=scan as i64).flat_map(|m| if m == 0 { vec![0] } else { vec![m, -m] });
    for n in order {
        let r = c.ln_abs(n) - g.ln_bound(n);
        if r > worst.1 {
            worst = (n, r);
        }
        if r > MEMBERSHIP_SLACK && first_violation.is_none() {
            first_violation = Some((n, r));
        }
    }
    if let Some((n, r)) = first_violation {
        return Membership {
            member: false,
            witness_index: n,
            witness_ratio: r.exp(),
            scanned_to: scan,
        };
    }
    let member = Membership {
        member: true,
        witness_index: worst.0,
        witness_ratio: worst.1.exp(),
        scanned_to: scan,
    };
    let Some(rule) = c.rule() else {
        return member;
    };
    let Some(mut terms) = rule.asymptotics() else {
        return member;
    };
    terms.push((g.order, -g.base.ln()));
    let eventually_violates = match leading(&terms) {
        Some((_, a)) => a > 0.0,
        None => rule_derivative(rule) > 0,
    };
    if !eventually_violates {
        return member;
    }
    let (witness_index, r) = (scan + 1..=MAX_TERMS)
        .map(|m| (m as i64, c.ln_abs(m as i64) - g.ln_bound(m as i64)))
        .find(|&(_, r)| r > MEMBERSHIP_SLACK)
        .unwrap_or((MAX_TERMS as i64 + 1, f64::INFINITY));
    Membership {
        member: false,
        witness_index,
        witness_ratio: r.exp(),
        scanned_to: scan,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub class: GrowthClass,
    /// True for an all-zero window; the class is then a placeholder with `c = 0`.
    pub degenerate: bool,
}

/// Fits `|F_n| <= c · b^{|n|^k}` by least squares of `ln|F_n|` against
/// `|n|^k` over the nonzero window entries; `c` is the largest ratio against
/// the fitted base. Bases `b < 1` give a test class, the rest a dual class.
pub fn fit_growth(c: &CoefficientSequence, k: u32) -> Result<GrowthFit> {
    if k < 1 {
        return Err(Error::InvalidClass("order k must be >= 1".into()));
    }
    if c.halfwidth() < 4 {
        return Err(Error::WindowTooSmall {
            radius: c.halfwidth(),
            min: 4,
        });
    }
    let pts: Vec<(f64, f64)> = c
        .indices()
        .filter_map(|n| {
            let l = c.ln_abs(n);
            l.is_finite()
                .then(|| ((n.unsigned_abs() as f64).powi(k as i32), l))
        })
        .collect();
    if pts.is_empty() {
        return Ok(GrowthFit {
            class: GrowthClass {
                kind: ClassKind::Test,
                base: 0.5,
                order: k,
                constant: 0.0,
            },
            degenerate: true,
        });
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut base = slope.exp();
    let kind = if base < 1.0 {
        ClassKind::Test
    } else {
        base = base.max(1.0 + f64::EPSILON);
        ClassKind::Dual
    };
    let ln_c = pts
        .iter()
        .map(|&(x, y)| y - x * base.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrowthFit {
        class: GrowthClass {
            kind,
            base,
            order: k,
            constant: ln_c.exp(),
        },
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub value: Complex64,
    /// Bound on the neglected part of the series.
    pub tail_estimate: f64,
    /// Largest `|n|` summed.
    pub last_index: usize,
}

/// Growth terms of `ln|F_n| + ln|f_n|` beyond both windows, `None` when one
/// side vanishes there (the pairing is then a finite sum).
fn product_asymptotics(
    a: &CoefficientSequence,
    b: &CoefficientSequence,
) -> Option<(Vec<(u32, f64)>, u32)> {
    let (ra, rb) = (a.rule()?, b.rule()?);
    let mut terms = ra.asymptotics()?;
    terms.extend(rb.asymptotics()?);
    Some((terms, rule_derivative(ra) + rule_derivative(rb)))
}

/// `2π Σ w(n) f̂_n conj(F_n)`, truncated once the tail bound drops below
/// `tol`. `w` must satisfy `|w(n)| <= weight_bound(n)` with `weight_bound`
/// nondecreasing in `|n|` and at most polynomial.
pub(crate) fn pair_weighted(
    dist: &CoefficientSequence,
    test: &CoefficientSequence,
    w: impl Fn(i64) -> f64,
    weight_poly: u32,
    tol: f64,
) -> Result<Pairing> {
    let term = |n: i64| -> Complex64 {
        let wn = w(n);
        if wn == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (fa, fb) = (dist.get(n), test.get(n));
        if fa.norm().is_finite() && fb.norm().is_finite() {
            fb * fa.conj() * wn
        } else {
            // overflow in one factor: combine in log space
            let l = dist.ln_abs(n) + test.ln_abs(n);
            let phase = (fb / fb.norm()) * (fa / fa.norm()).conj();
            phase * l.exp() * wn
        }
    };
    let window = dist.halfwidth().max(test.halfwidth()) as i64;
    let mut sum = term(0);
    for m in 1..=window {
        sum += term(m) + term(-m);
    }
    let Some((mut growth, poly)) = product_asymptotics(dist, test) else {
        return Ok(Pairing {
            value: sum * 2.0 * PI,
            tail_estimate: 0.0,
            last_index: window as usize,
        });
    };
    let poly = poly + weight_poly;
    growth.retain(|t| t.1 != 0.0);
    match leading(&growth) {
        Some((_, a)) if a < 0.0 => {}
        _ => {
            return Err(Error::DivergentPairing(
                "coefficient product does not decay".into(),
            ))
        }
    }
    // envelope of |term(±n)| including the polynomial weight bound
    let env = |n: i64| -> f64 {
        let l = dist.ln_abs(n) + test.ln_abs(n) + poly as f64 * (n.max(1) as f64).ln();
        l.exp()
    };
    let mut m = window;
    loop {
        let (e1, e2, e3) = (env(m + 1), env(m + 2), env(m + 3));
        let r1 = if e1 > 0.0 { e2 / e1 } else { 0.0 };
        let r2 = if e2 > 0.0 { e3 / e2 } else { 0.0 };
        if e1 == 0.0 || (r1 < 1.0 && r2 <= r1) {
            let tail = 2.0 * PI * 2.0 * e1 / (1.0 - r1);
            if tail < tol {
                return Ok(Pairing {
                    value: sum * 2.0 * PI,
                    tail_estimate: tail,
                    last_index: m as usize,
                });
            }
        }
        m += 1;
        if m as usize > MAX_TERMS {
            return Err(Error::DivergentPairing(format!(
                "no convergence within {MAX_TERMS} terms"
            )));
        }
        sum += term(m) + term(-m);
    }
}

/// Class-level check: `F ∈ A^{p,k}` against a test rule `q^{|n|^k}` needs `pq < 1`.
fn check_declared(dist: &UltraDistribution, test: &CoefficientSequence) -> Result<()> {
    let (
        Some(g),
        Some(Rule::Power {
            base, k, heat_time, ..
        }),
    ) = (dist.declared_class(), test.rule())
    else {
        return Ok(());
    };
    if g.kind == ClassKind::Dual && *k == g.order && *heat_time == 0.0 && g.base * base >= 1.0 {
        return Err(Error::DivergentPairing(format!(
            "p q = {} >= 1",
            g.base * base
        )));
    }
    Ok(())
}

/// `<F, f> = 2π Σ f̂_n conj(F_n)`.
pub fn pair(dist: &UltraDistribution, test: &CoefficientSequence, tol: f64) -> Result<Pairing> {
    check_declared(dist, test)?;
    pair_weighted(dist.coeffs(), test, |_| 1.0, 0, tol)
}

/// `𝒯ₜ F = Σ F_n e^{-n²t} e^{inx}`.
///
/// Rules and declared classes of order `k > 2` with base above 1 are
/// rejected for `t > 0`: `e^{-n²t}` cannot dominate their growth.
pub fn evolve_ultra(dist: &UltraDistribution, t: f64) -> Result<UltraDistribution> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    if t == 0.0 {
        return Ok(dist.clone());
    }
    if let Some(Rule::Power { base, k, .. }) = dist.coeffs.rule() {
        if *k > 2 && *base > 1.0 {
            return Err(Error::UnsmoothableClass { k: *k, base: *base });
        }
    }
    if let Some(g) = &dist.declared_class {
        if g.order > 2 && g.kind == ClassKind::Dual {
            return Err(Error::UnsmoothableClass {
                k: g.order,
                base: g.base,
            });
        }
    }
    let mut coeffs = dist
        .coeffs
        .map_window(|n, c| c * (-((n * n) as f64) * t).exp());
    if let Some(Rule::Power {
        base,
        k,
        scale,
        heat_time,
        derivative,
    }) = dist.coeffs.rule().cloned()
    {
        coeffs.set_rule(Some(Rule::Power {
            base,
            k,
            scale,
            heat_time: heat_time + t,
            derivative,
        }));
    }
    let declared_class = dist.declared_class.and_then(|g| {
        if g.order != 2 {
            return Some(g);
        }
        let base = g.base * (-t).exp();
        let kind = if base < 1.0 {
            ClassKind::Test
        } else {
            ClassKind::Dual
        };
        GrowthClass::new(kind, base, 2, g.constant).ok()
    });
    Ok(UltraDistribution {
        coeffs,
        declared_class,
    })
}

/// Time `t_F = 2 ln p` (plus [`SMOOTHING_MARGIN`]) after which `𝒯ₜ` maps
/// `A^{p,2}` into the test class `A_{q,2}`, `q = e^{-t_F/2}`.
pub fn smoothing_threshold(g: &GrowthClass) -> Result<f64> {
    g.validate()?;
    if g.order != 2 {
        return Err(Error::UnsupportedOrder(g.order));
    }
    if g.kind != ClassKind::Dual {
        return Err(Error::InvalidClass(
            "smoothing threshold needs a dual class".into(),
        ));
    }
    Ok(2.0 * g.base.ln() + SMOOTHING_MARGIN)
}

/// Test class `A_{q,2}`, `q = e^{-t_F/2}`, reached at the smoothing threshold.
pub fn smoothed_class(g: &GrowthClass) -> Result<GrowthClass> {
    let t_f = smoothing_threshold(g)?;
    GrowthClass::test((-t_f / 2.0).exp(), 2, g.constant)
}

/// `(in)^m F_n`. The declared class is dropped for `m > 0`.
pub fn derivative_coeffs(c: &CoefficientSequence, m: u32) -> CoefficientSequence {
    if m == 0 {
        return c.clone();
    }
    let factor = |n: i64| Complex64::new(0.0, n as f64).powu(m);
    let mut out = c.map_window(|n, v| v * factor(n));
    if let Some(Rule::Power {
        base,
        k,
        scale,
        heat_time,
        derivative,
    }) = c.rule().cloned()
    {
        out.set_rule(Some(Rule::Power {
            base,
            k,
            scale,
            heat_time,
            derivative: derivative + m,
        }));
    }
    out
}

pub fn derivative_ultra(dist: &UltraDistribution, m: u32) -> UltraDistribution {
    if m == 0 {
        return dist.clone();
    }
    UltraDistribution {
        coeffs: derivative_coeffs(&dist.coeffs, m),
        declared_class: None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakLimitRow {
    pub t: f64,
    /// `|<𝒯ₜF - F, f>|`.
    pub defect: f64,
    /// `<(𝒯ₜF - F)/t, f>`.
    pub quotient: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakLimitReport {
    /// Rows ordered by decreasing `t`.
    pub rows: Vec<WeakLimitRow>,
    /// Defects never increase as `t` decreases.
    pub monotone: bool,
    /// The defect at the smallest `t` is below the requested tolerance.
    pub below_tol: bool,
    /// `<F'', f>`, the limit of the quotients.
    pub generator_limit: Complex64,
}

/// Tabulates `<𝒯ₜF - F, f>` for `t` in `times`, computed as
/// `2π Σ f̂_n conj(F_n) (e^{-n²t} - 1)` to avoid cancellation.
pub fn weak_limit_check(
    dist: &UltraDistribution,
    test: &CoefficientSequence,
    times: &[f64],
    tol: f64,
) -> Result<WeakLimitReport> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time list".into()));
    }
    check_declared(dist, test)?;
    let mut ts = times.to_vec();
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("times must be positive".into()));
    }
    ts.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let p = pair_weighted(
            dist.coeffs(),
            test,
            |n| (-((n * n) as f64) * t).exp_m1(),
            0,
            DEFAULT_PAIR_TOL,
        )?;
        rows.push(WeakLimitRow {
            t,
            defect: p.value.norm(),
            quotient: p.value / t,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].defect <= w[0].defect);
    let below_tol = rows.last().map(|r| r.defect < tol).unwrap_or(false);
    let generator_limit = pair(&derivative_ultra(dist, 2), test, DEFAULT_PAIR_TOL)?.value;
    Ok(WeakLimitReport {
        rows,
        monotone,
        below_tol,
        generator_limit,
    })
}

/// Constants of `|f^{(m)}(x)| <= C · B^m · m^{m/k}` for `f` in a test class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeBound {
    pub c: f64,
    pub b: f64,
    pub k: u32,
    /// `max(1, sup_m Γ((m+1)/k) / m^{m/k})`, already folded into `c`.
    pub stirling_adjustment: f64,
}

impl DerivativeBound {
    pub fn bound(&self, m: u32) -> f64 {
        let mf = m as f64;
        let growth = if m == 0 {
            1.0
        } else {
            mf.powf(mf / self.k as f64)
        };
        self.c * self.b.powi(m as i32) * growth
    }
}

/// `a = ln(1/q)`, `B = a^{-1/k}`, `C = (2c/k) a^{-1/k}` times the factor
/// turning `Γ((m+1)/k)` into `m^{m/k}`.
pub fn derivative_bound_constants(g: &GrowthClass) -> Result<DerivativeBound> {
    g.validate()?;
    if g.kind != ClassKind::Test {
        return Err(Error::InvalidClass(
            "derivative bounds need a test class (q < 1)".into(),
        ));
    }
    let k = g.order as f64;
    let a = g.alpha();
    let b = (1.0 / a).powf(1.0 / k);
    let c = 2.0 * g.constant / k * (1.0 / a).powf(1.0 / k);
    let stirling = (1..=64u32)
        .map(|m| {
            let mf = m as f64;
            (libm::lgamma((mf + 1.0) / k) - mf / k * mf.ln()).exp()
        })
        .fold(1.0, f64::max);
    Ok(DerivativeBound {
        c: c * stirling,
        b,
        k: g.order,
        stirling_adjustment: stirling,
    })
}

/// Coefficients of `|p|²` for a trigonometric polynomial `p = Σ_{|j|<=d} a_j e^{ijx}`:
/// a nonnegative trigonometric polynomial of degree `2d`.
pub fn trig_square(a: &CoefficientSequence) -> CoefficientSequence {
    let d = a.halfwidth() as i64;
    CoefficientSequence::from_fn(2 * d as usize, |n| {
        (-d..=d)
            .filter(|&j| (j - n).abs() <= d)
            .map(|j| a.get(j) * a.get(j - n).conj())
            .sum()
    })
}

fn random_trig_square(rng: &mut ChaCha8Rng, degree: usize) -> CoefficientSequence {
    let a = CoefficientSequence::from_fn(degree, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    trig_square(&a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub trials: usize,
    /// Smallest `Re <𝒯ₜF, f>` over the trials.
    pub min_pairing: f64,
    /// Largest `|<𝒯ₜF, f> - <F, f⋆θ₃>|`.
    pub max_route_gap: f64,
}

/// Degree of the random trigonometric polynomials squared into trials.
pub const TRIAL_DEGREE: usize = 4;

/// Samples nonnegative trial functions `f = |p|²` and checks
/// `<𝒯ₜF, f> >= -tol`, computing each pairing twice: in coefficient space, and
/// as `<F, f⋆θ₃>` with the convolution done on a grid against the sampled
/// theta kernel.
pub fn positivity_check(
    dist: &UltraDistribution,
    t: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<PositivityReport> {
    let evolved = evolve_ultra(dist, t)?;
    // grid fine enough that kernel aliasing e^{-(N - 2d)² t} is negligible
    let span = 2 * TRIAL_DEGREE;
    let need = span as f64 + (40.0 / t).sqrt() + 2.0;
    let n = (need.ceil() as usize)
        .max(2 * span + 2)
        .max(64)
        .next_power_of_two();
    let grid = PeriodicGrid::one_d(n)?;
    let theta = kernel(t, &grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_pairing = f64::INFINITY;
    let mut max_route_gap: f64 = 0.0;
    for _ in 0..trials {
        let f = random_trig_square(&mut rng, TRIAL_DEGREE);
        let direct = pair(&evolved, &f, DEFAULT_PAIR_TOL)?.value;
        let smoothed = analyze(&circular_convolve(&synthesize(&f, &grid)?, &theta)?)?;
        let via_kernel = pair(dist, &smoothed.without_rule(), DEFAULT_PAIR_TOL)?.value;
        min_pairing = min_pairing.min(direct.re);
        max_route_gap = max_route_gap.max((direct - via_kernel).norm());
    }
    Ok(PositivityReport {
        positive: min_pairing >= -tol,
        trials,
        min_pairing,
        max_route_gap,
    })
}
