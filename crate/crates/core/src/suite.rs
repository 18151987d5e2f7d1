//! Property-check suites with machine-readable reports.
//!
//! * `thm1`: the one-dimensional heat semigroup, its kernel, the Poisson
//!   semigroup and subordination.
//! * `thm2`: the same properties on a `d = 2` grid, plus the non-separable
//!   `d`-dimensional Poisson symbol.
//! * `thm3`: the coefficient engine for ultra-distributions.
//!
//! Random inputs come from a seeded ChaCha8 stream, so a report is a pure
//! function of `(suite, n, seed)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSequence, Rule};
use crate::error::{Error, Result};
use crate::fourier::{analyze, circular_convolve, synthesize, PeriodicGrid, SampledFunction};
use crate::quadrature::SubordinationQuadrature;
use crate::semigroup::{
    generator_apply, heat_residual, maximal_function, poisson_evolve_d,
    poisson_evolve_d_subordinated, poisson_evolve_kernel, poisson_evolve_multiplier, subordinate,
    theta_evolve, theta_evolve_d, theta_evolve_d_ordered,
};
use crate::theta::kernel;
use crate::ultradist::{
    check_membership, derivative_bound_constants, derivative_coeffs, derivative_ultra,
    evolve_ultra, pair, positivity_check, smoothed_class, smoothing_threshold, weak_limit_check,
    GrowthClass, UltraDistribution, DEFAULT_PAIR_TOL,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Thm1,
    Thm2,
    Thm3,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Thm1 => "thm1",
            Suite::Thm2 => "thm2",
            Suite::Thm3 => "thm3",
        }
    }

    pub fn default_n(&self) -> usize {
        match self {
            Suite::Thm1 => 256,
            Suite::Thm2 => 64,
            Suite::Thm3 => 64,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(Suite::Thm1),
            "thm2" => Ok(Suite::Thm2),
            "thm3" => Ok(Suite::Thm3),
            other => Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
        }
    }
}

/// Statements each record checks. Every record carries one of these.
pub mod anchors {
    pub const SEMIGROUP: &str = "T_{t1+t2} = T_{t1} T_{t2}";
    pub const CHAPMAN_KOLMOGOROV: &str = "K_{t1} * K_{t2} = K_{t1+t2}";
    pub const CONSERVATIVE: &str = "T_t 1 = 1, mean preserved";
    pub const POSITIVE: &str = "f >= 0 implies T_t f >= 0";
    pub const CONTRACTIVE: &str = "||T_t f||_p <= ||f||_p";
    pub const STRONG_CONTINUITY: &str = "||T_t f - f|| -> 0 as t -> 0";
    pub const SYMMETRIC: &str = "<T_t f, g> = <f, T_t g>";
    pub const GENERATOR: &str = "(T_t f - f)/t -> f''";
    pub const HEAT_EQUATION: &str = "u = T_t f solves u_t = u_xx";
    pub const MAXIMAL: &str = "||T* f||_p <= A_p ||f||_p";
    pub const SUBORDINATION: &str = "P_t = subordinated T_{t^2/4u}";
    pub const POISSON_KERNEL: &str = "P_t f = f * (1-r^2)/(2pi(1-2r cos x+r^2))";
    pub const TENSOR: &str = "K_t(x) = (2pi)^{-d} prod theta_3(x_i, e^{-t})";
    pub const POISSON_D: &str = "d-dim subordinated symbol e^{-t|n|}";
    pub const ULTRA_SEMIGROUP: &str = "T_{t1+t2} F = T_{t1} T_{t2} F";
    pub const ULTRA_WEAK: &str = "T_t F -> F weakly";
    pub const ULTRA_GENERATOR: &str = "(T_t F - F)/t -> F''";
    pub const ULTRA_DUALITY: &str = "<F^(m), f> = (-1)^m <F, f^(m)>";
    pub const ULTRA_SMOOTHING: &str = "T_t F in A_{q,2} for t >= t_F";
    pub const ULTRA_POSITIVE: &str = "<T_t F, f> = <F, f * theta_3> >= 0";
    pub const ULTRA_PAIRING: &str = "<F, f> = 2pi sum f_n conj(F_n)";
    pub const ULTRA_INCLUSION: &str = "A_{q,k} subset A_{q,1}";
    pub const DERIVATIVE_BOUND: &str = "|f^(m)| <= C B^m m^{m/k}";

    pub const ALL: &[&str] = &[
        SEMIGROUP,
        CHAPMAN_KOLMOGOROV,
        CONSERVATIVE,
        POSITIVE,
        CONTRACTIVE,
        STRONG_CONTINUITY,
        SYMMETRIC,
        GENERATOR,
        HEAT_EQUATION,
        MAXIMAL,
        SUBORDINATION,
        POISSON_KERNEL,
        TENSOR,
        POISSON_D,
        ULTRA_SEMIGROUP,
        ULTRA_WEAK,
        ULTRA_GENERATOR,
        ULTRA_DUALITY,
        ULTRA_SMOOTHING,
        ULTRA_POSITIVE,
        ULTRA_PAIRING,
        ULTRA_INCLUSION,
        DERIVATIVE_BOUND,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            anchor: anchor.to_owned(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub records: Vec<CheckRecord>,
    pub environment: Environment,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "suite {} (n = {}, d = {}, seed = {})",
            self.suite, self.environment.n, self.environment.d, self.environment.seed
        );
        for r in &self.records {
            let _ = writeln!(
                s,
                "  {:<4} {:<28} {:>12.3e} <= {:<10.1e} {}",
                if r.pass { "ok" } else { "FAIL" },
                r.name,
                r.max_error,
                r.tolerance,
                r.anchor
            );
        }
        s
    }
}

pub fn run_suite(suite: Suite, n: usize, seed: u64) -> Result<CheckReport> {
    let (records, d) = match suite {
        Suite::Thm1 => (thm1(n, seed)?, 1),
        Suite::Thm2 => (thm2(n, seed)?, 2),
        Suite::Thm3 => (thm3(n, seed)?, 1),
    };
    Ok(CheckReport {
        suite: suite.name().to_owned(),
        records,
        environment: Environment { n, d, seed },
    })
}

/// Real `Σ_k a_k cos(k·x + φ_k)` over integer vectors `|k_j| <= band`,
/// amplitudes decaying like `1/(1 + |k|²)`.
pub fn random_band_limited(grid: &PeriodicGrid, band: i64, rng: &mut impl Rng) -> SampledFunction {
    let d = grid.dims();
    let mut modes: Vec<(Vec<i64>, f64, f64)> = Vec::new();
    let count = (2 * band + 1).pow(d as u32);
    for i in 0..count {
        let k: Vec<i64> = (0..d)
            .map(|a| (i / (2 * band + 1).pow(a as u32)) % (2 * band + 1) - band)
            .collect();
        let k2: i64 = k.iter().map(|v| v * v).sum();
        let amp = rng.gen_range(-1.0..1.0) / (1.0 + k2 as f64);
        let phase = rng.gen_range(0.0..2.0 * PI);
        modes.push((k, amp, phase));
    }
    SampledFunction::from_fn(grid.clone(), |x| {
        modes
            .iter()
            .map(|(k, a, p)| {
                let arg: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                a * (arg + p).cos()
            })
            .sum()
    })
}

fn sup_diff(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    a.max_abs_diff(b)
}

const PAIR_TIMES: [f64; 3] = [0.1, 0.5, 1.3];

/// Records shared by the one- and two-dimensional suites. `evolve` is the
/// heat semigroup under test on `grid`.
fn heat_records(
    grid: &PeriodicGrid,
    evolve: &dyn Fn(&SampledFunction, f64) -> Result<SampledFunction>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckRecord>> {
    let band = if grid.dims() == 1 { 16 } else { 4 };
    let f = random_band_limited(grid, band, rng);
    let g = random_band_limited(grid, band, rng);
    let square = random_band_limited(grid, band / 2, rng).map(|v| v * v);
    let mut records = vec![];

    let mut err: f64 = 0.0;
    for &t1 in &PAIR_TIMES {
        for &t2 in &PAIR_TIMES {
            let lhs = evolve(&evolve(&f, t2)?, t1)?;
            err = err.max(sup_diff(&lhs, &evolve(&f, t1 + t2)?)?);
        }
    }
    records.push(CheckRecord::new(
        "semigroup_law",
        anchors::SEMIGROUP,
        err,
        1e-11,
    ));

    let mut err: f64 = 0.0;
    for &t1 in &PAIR_TIMES {
        for &t2 in &PAIR_TIMES {
            let conv = circular_convolve(&kernel(t1, grid)?, &kernel(t2, grid)?)?;
            err = err.max(sup_diff(&conv, &kernel(t1 + t2, grid)?)?);
        }
    }
    records.push(CheckRecord::new(
        "chapman_kolmogorov",
        anchors::CHAPMAN_KOLMOGOROV,
        err,
        1e-10,
    ));

    let one = SampledFunction::constant(grid.clone(), 1.0);
    let mut err: f64 = 0.0;
    for &t in &PAIR_TIMES {
        err = err.max((evolve(&f, t)?.mean() - f.mean()).norm());
        err = err.max(sup_diff(&evolve(&one, t)?, &one)?);
        err = err.max((kernel(t, grid)?.integral().re - 1.0).abs());
    }
    records.push(CheckRecord::new(
        "conservation",
        anchors::CONSERVATIVE,
        err,
        1e-12,
    ));

    let mut worst: f64 = 0.0;
    for &t in &[0.01, 0.1, 0.5, 1.3] {
        worst = worst.max(-evolve(&square, t)?.min_real());
        worst = worst.max(-kernel(t, grid)?.min_real());
    }
    records.push(CheckRecord::new(
        "positivity",
        anchors::POSITIVE,
        worst.max(0.0),
        1e-12,
    ));

    let mut excess: f64 = 0.0;
    for &t in &PAIR_TIMES {
        let u = evolve(&f, t)?;
        for p in [1.0, 2.0, f64::INFINITY] {
            excess = excess.max(u.lp_norm(p) - f.lp_norm(p));
        }
    }
    records.push(CheckRecord::new(
        "contractivity",
        anchors::CONTRACTIVE,
        excess.max(0.0),
        1e-12,
    ));

    let defects: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&t| Ok(evolve(&f, t)?.sub(&f)?.lp_norm(2.0)))
        .collect::<Result<_>>()?;
    let rise = defects
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    records.push(CheckRecord::new(
        "strong_continuity",
        anchors::STRONG_CONTINUITY,
        rise,
        0.0,
    ));

    let mut err: f64 = 0.0;
    for &t in &PAIR_TIMES {
        let lhs = evolve(&f, t)?.inner(&g)?;
        let rhs = f.inner(&evolve(&g, t)?)?;
        err = err.max((lhs - rhs).norm());
    }
    records.push(CheckRecord::new(
        "self_adjointness",
        anchors::SYMMETRIC,
        err,
        1e-12,
    ));

    // (T_t f - f)/t - Lf is bounded by t/2 · Σ|f̂_n| |n|⁴
    let lf = generator_apply(&f);
    let l2f = generator_apply(&lf);
    let bound = 0.5 * spectral_l1(&l2f);
    let mut ratio: f64 = 0.0;
    for t in [1e-2, 1e-3, 1e-4] {
        let q = evolve(&f, t)?.sub(&f)?.scaled(1.0 / t);
        ratio = ratio.max(sup_diff(&q, &lf)? / t);
    }
    records.push(CheckRecord::new(
        "generator",
        anchors::GENERATOR,
        ratio,
        bound,
    ));

    let trig = random_band_limited(grid, if grid.dims() == 1 { 8 } else { 3 }, rng);
    let res = heat_residual(&trig, &[0.2, 0.5, 1.0, 2.0], 1e-4)?;
    records.push(CheckRecord::new(
        "heat_residual",
        anchors::HEAT_EQUATION,
        res.max_residual,
        1e-6,
    ));

    // observed maximal-function constant for p = 2
    let times = crate::semigroup::log_times(1e-3, 10.0, 32);
    let star = maximal_function(&f, &times)?;
    records.push(CheckRecord::new(
        "maximal_function_l2",
        anchors::MAXIMAL,
        star.lp_norm(2.0) / f.lp_norm(2.0),
        2.0,
    ));
    Ok(records)
}

/// `Σ |ĝ_n|` from the discrete spectrum.
fn spectral_l1(g: &SampledFunction) -> f64 {
    let n = g.len() as f64;
    crate::fourier::forward_spectrum(g)
        .iter()
        .map(|c| c.norm() / n)
        .sum()
}

fn poisson_records(
    grid: &PeriodicGrid,
    rng: &mut ChaCha8Rng,
    quad: &SubordinationQuadrature,
) -> Result<Vec<CheckRecord>> {
    let f = random_band_limited(grid, 8, rng);
    let square = random_band_limited(grid, 4, rng).map(|v| v * v);
    let mut records = vec![];

    let mut err: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for &t1 in &PAIR_TIMES {
        for &t2 in &PAIR_TIMES {
            let lhs = poisson_evolve_multiplier(&poisson_evolve_multiplier(&f, t2)?, t1)?;
            err = err.max(sup_diff(&lhs, &poisson_evolve_multiplier(&f, t1 + t2)?)?);
        }
        worst = worst.max(-poisson_evolve_multiplier(&square, t1)?.min_real());
    }
    records.push(CheckRecord::new(
        "poisson_semigroup_law",
        anchors::SEMIGROUP,
        err,
        1e-11,
    ));
    records.push(CheckRecord::new(
        "poisson_positivity",
        anchors::POSITIVE,
        worst.max(0.0),
        1e-12,
    ));

    // the sampled Poisson kernel aliases at order e^{-Nt}, so use a fine grid
    let fine = PeriodicGrid::one_d(grid.sizes()[0].max(512))?;
    let ff = random_band_limited(&fine, 8, rng);
    let mut err: f64 = 0.0;
    for &t in &[0.2, 0.5, 1.0, 2.0] {
        let a = poisson_evolve_kernel(&ff, t)?;
        err = err.max(sup_diff(&a, &poisson_evolve_multiplier(&ff, t)?)?);
    }
    records.push(CheckRecord::new(
        "poisson_kernel_vs_multiplier",
        anchors::POISSON_KERNEL,
        err,
        1e-10,
    ));

    let mut err: f64 = 0.0;
    for &t in &[0.2, 0.5, 1.0, 2.0] {
        let s = subordinate(&f, t, quad)?;
        err = err.max(sup_diff(&s, &poisson_evolve_multiplier(&f, t)?)?);
    }
    records.push(CheckRecord::new(
        "subordination",
        anchors::SUBORDINATION,
        err,
        1e-7,
    ));
    Ok(records)
}

fn thm1(n: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let grid = PeriodicGrid::one_d(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = heat_records(&grid, &|f, t| theta_evolve(f, t), &mut rng)?;

    // convolution path against the multiplier path
    let f = random_band_limited(&grid, 16, &mut rng);
    let mut err: f64 = 0.0;
    for &t in &PAIR_TIMES {
        let conv = circular_convolve(&f, &kernel(t, &grid)?)?;
        err = err.max(sup_diff(&conv, &theta_evolve(&f, t)?)?);
    }
    records.push(CheckRecord::new(
        "kernel_vs_multiplier",
        anchors::CHAPMAN_KOLMOGOROV,
        err,
        1e-10,
    ));

    records.extend(poisson_records(
        &grid,
        &mut rng,
        &SubordinationQuadrature::default(),
    )?);
    Ok(records)
}

fn thm2(n: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let grid = PeriodicGrid::cube(2, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = heat_records(&grid, &|f, t| theta_evolve_d(f, t), &mut rng)?;

    let f = random_band_limited(&grid, 4, &mut rng);
    let mut err: f64 = 0.0;
    for &t in &PAIR_TIMES {
        let a = theta_evolve_d_ordered(&f, t, &[0, 1])?;
        let b = theta_evolve_d_ordered(&f, t, &[1, 0])?;
        err = err.max(sup_diff(&a, &b)?);
        let conv = circular_convolve(&f, &kernel(t, &grid)?)?;
        err = err.max(sup_diff(&conv, &a)?);
    }
    records.push(CheckRecord::new(
        "tensorization",
        anchors::TENSOR,
        err,
        1e-10,
    ));

    let prod = SampledFunction::from_fn(grid.clone(), |x| x[0].cos() * x[1].cos());
    let single = SampledFunction::from_fn(grid.clone(), |x| x[0].cos());
    let mut err: f64 = 0.0;
    for &t in &PAIR_TIMES {
        let expect = prod.scaled((-t * 2f64.sqrt()).exp());
        err = err.max(sup_diff(&poisson_evolve_d(&prod, t)?, &expect)?);
        err = err.max(sup_diff(
            &poisson_evolve_d(&single, t)?,
            &single.scaled((-t).exp()),
        )?);
    }
    records.push(CheckRecord::new(
        "poisson_d_symbol",
        anchors::POISSON_D,
        err,
        1e-10,
    ));

    let quad = SubordinationQuadrature::default();
    let mut err: f64 = 0.0;
    for &t in &[0.2, 0.5, 1.0, 2.0] {
        let s = poisson_evolve_d_subordinated(&f, t, &quad)?;
        err = err.max(sup_diff(&s, &poisson_evolve_d(&f, t)?)?);
    }
    records.push(CheckRecord::new(
        "subordination_d",
        anchors::SUBORDINATION,
        err,
        1e-7,
    ));
    Ok(records)
}

fn thm3(n: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut records = vec![];
    let comb = UltraDistribution::comb(24);
    let decaying = UltraDistribution::from_coeffs(CoefficientSequence::from_rule(
        24,
        Rule::power((-1f64).exp(), 1),
    )?);

    let mut err: f64 = 0.0;
    for dist in [&comb, &decaying] {
        for &t1 in &PAIR_TIMES {
            for &t2 in &PAIR_TIMES {
                let a = evolve_ultra(&evolve_ultra(dist, t1)?, t2)?;
                let b = evolve_ultra(dist, t1 + t2)?;
                err = err.max(a.coeffs().max_abs_diff(b.coeffs()));
                for m in [30, 40] {
                    err = err.max((a.coeffs().get(m) - b.coeffs().get(m)).norm());
                }
            }
        }
    }
    records.push(CheckRecord::new(
        "ultra_semigroup_exact",
        anchors::ULTRA_SEMIGROUP,
        err,
        1e-15,
    ));

    // a single mode stays a single mode
    let spike = UltraDistribution::from_coeffs(CoefficientSequence::from_real_fn(8, |k| {
        if k == 3 {
            1.0
        } else {
            0.0
        }
    }));
    let evolved = evolve_ultra(&spike, 0.7)?;
    let leak = (-8..=8)
        .filter(|&k| k != 3)
        .map(|k| evolved.coeffs().get(k).norm())
        .fold(0.0f64, f64::max);
    records.push(CheckRecord::new(
        "ultra_diagonal",
        anchors::ULTRA_SEMIGROUP,
        leak,
        0.0,
    ));

    let test = CoefficientSequence::from_rule(4, Rule::power(0.3, 2))?;
    let weak = weak_limit_check(&comb, &test, &[1.0, 0.1, 0.01], 1.0)?;
    let rise = weak
        .rows
        .windows(2)
        .map(|w| w[1].defect - w[0].defect)
        .fold(0.0f64, f64::max);
    records.push(CheckRecord::new(
        "ultra_weak_limit",
        anchors::ULTRA_WEAK,
        rise,
        0.0,
    ));

    let gen = weak_limit_check(&comb, &test, &[1e-7], 1.0)?;
    let quotient_err = (gen.rows[0].quotient - gen.generator_limit).norm();
    // |e^{-n²t} - 1 + n²t| <= n⁴t²/2
    let gen_bound = 1e-7 * 2.0 * PI * test_moment(&test, 4) / 2.0 + 1e-9;
    records.push(CheckRecord::new(
        "ultra_generator",
        anchors::ULTRA_GENERATOR,
        quotient_err,
        gen_bound,
    ));

    let test4 = CoefficientSequence::from_rule(4, Rule::power(0.4, 2))?;
    let mut err: f64 = 0.0;
    for dist in [&comb, &decaying] {
        for m in 0..=4u32 {
            let lhs = pair(&derivative_ultra(dist, m), &test4, DEFAULT_PAIR_TOL)?.value;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = pair(dist, &derivative_coeffs(&test4, m), DEFAULT_PAIR_TOL)?.value * sign;
            err = err.max((lhs - rhs).norm());
        }
    }
    records.push(CheckRecord::new(
        "ultra_derivative_duality",
        anchors::ULTRA_DUALITY,
        err,
        1e-10,
    ));

    let mut misses = 0.0;
    for p in [1.5, 2.0, 4.0] {
        let class = GrowthClass::dual(p, 2, 1.0)?;
        let dist = UltraDistribution::new(
            CoefficientSequence::from_rule(6, Rule::power(p, 2))?,
            Some(class),
        )?;
        let t_f = smoothing_threshold(&class)?;
        let target = smoothed_class(&class)?;
        if !check_membership(evolve_ultra(&dist, t_f + 0.1)?.coeffs(), &target).member {
            misses += 1.0;
        }
        if check_membership(evolve_ultra(&dist, t_f / 2.0)?.coeffs(), &target).member {
            misses += 1.0;
        }
    }
    records.push(CheckRecord::new(
        "ultra_smoothing_sweep",
        anchors::ULTRA_SMOOTHING,
        misses,
        0.0,
    ));

    let constant = UltraDistribution::from_coeffs(CoefficientSequence::from_real_fn(0, |_| 1.0));
    let mut worst: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for (i, dist) in [&constant, &decaying, &comb].into_iter().enumerate() {
        let r = positivity_check(dist, 0.5, 16, seed.wrapping_add(i as u64), 1e-12)?;
        worst = worst.max(-r.min_pairing);
        gap = gap.max(r.max_route_gap);
    }
    records.push(CheckRecord::new(
        "ultra_positivity",
        anchors::ULTRA_POSITIVE,
        worst.max(0.0),
        1e-12,
    ));
    records.push(CheckRecord::new(
        "ultra_pairing_routes",
        anchors::ULTRA_POSITIVE,
        gap,
        1e-10,
    ));

    // tail estimate against a window twice as wide
    let mut worst_ratio: f64 = 0.0;
    for (base, k) in [(0.5, 1), (0.8, 1), (0.9, 2)] {
        let f = CoefficientSequence::from_rule(2, Rule::power(base, k))?;
        let p = pair(&comb, &f, 1e-8)?;
        let m = 2 * p.last_index as i64;
        let mut wide = f.get(0);
        for j in 1..=m {
            wide += f.get(j) + f.get(-j);
        }
        let diff = (wide * 2.0 * PI - p.value).norm();
        worst_ratio = worst_ratio.max(diff / p.tail_estimate);
    }
    records.push(CheckRecord::new(
        "ultra_tail_estimate",
        anchors::ULTRA_PAIRING,
        worst_ratio,
        1.0,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0.0;
    for _ in 0..32 {
        let q = rng.gen_range(0.05..0.95);
        let k = rng.gen_range(1..=4u32);
        let c = rng.gen_range(0.5..2.0);
        let class = GrowthClass::test(q, k, c)?;
        let seq = CoefficientSequence::from_real_fn(12, |m| {
            c * q.powf((m.unsigned_abs() as f64).powi(k as i32)) * rng.gen_range(0.0..1.0)
        });
        if check_membership(&seq, &class).member
            && !check_membership(&seq, &GrowthClass::test(q, 1, c)?).member
        {
            violations += 1.0;
        }
    }
    records.push(CheckRecord::new(
        "ultra_inclusion_chain",
        anchors::ULTRA_INCLUSION,
        violations,
        0.0,
    ));

    records.push(derivative_bound_record(n)?);
    Ok(records)
}

fn test_moment(f: &CoefficientSequence, power: i32) -> f64 {
    (1..=60)
        .map(|m: i64| 2.0 * f.get(m).norm() * (m as f64).powi(power))
        .sum()
}

/// Largest `max|f^{(m)}| / (C B^m m^{m/2})` over `m = 1..=12` for
/// `f̂_n = 0.5^{n²}`, derivatives taken spectrally on an `n`-point grid.
pub fn derivative_bound_ratio(n: usize) -> Result<f64> {
    let class = GrowthClass::test(0.5, 2, 1.0)?;
    let bound = derivative_bound_constants(&class)?;
    let grid = PeriodicGrid::one_d(n)?;
    let f =
        CoefficientSequence::from_rule((n / 2 - 1).min(40), Rule::power(0.5, 2))?.without_rule();
    let mut worst: f64 = 0.0;
    for m in 1..=12u32 {
        let dm = synthesize(&derivative_coeffs(&f, m), &grid)?;
        worst = worst.max(dm.lp_norm(f64::INFINITY) / bound.bound(m));
    }
    Ok(worst)
}

/// Slack allowed on the derivative bound.
pub const DERIVATIVE_SLACK: f64 = 10.0;

fn derivative_bound_record(n: usize) -> Result<CheckRecord> {
    Ok(CheckRecord::new(
        "derivative_bound",
        anchors::DERIVATIVE_BOUND,
        derivative_bound_ratio(n.max(64))?,
        DERIVATIVE_SLACK,
    ))
}

/// Round trip used by the kernel route of positivity checks; exposed for tests.
pub fn smooth_coefficients(
    f: &CoefficientSequence,
    t: f64,
    n: usize,
) -> Result<CoefficientSequence> {
    let grid = PeriodicGrid::one_d(n)?;
    let sampled = synthesize(f, &grid)?;
    analyze(&circular_convolve(&sampled, &kernel(t, &grid)?)?)
}
