use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use theta_semigroup::coeffs::{CoefficientSequence, Rule};
use theta_semigroup::fourier::{analyze, circular_convolve, reference, synthesize, PeriodicGrid};
use theta_semigroup::semigroup::{poisson_evolve_multiplier, theta_evolve};
use theta_semigroup::theta::{theta3_bound, theta3_product, theta3_series, ThetaParams};
use theta_semigroup::ultradist::{
    check_membership, derivative_coeffs, derivative_ultra, evolve_ultra, pair, GrowthClass,
    UltraDistribution,
};

fn coeff_vec(h: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * h + 1)
}

fn sequence(h: usize, raw: &[(f64, f64)]) -> CoefficientSequence {
    CoefficientSequence::new(h, raw.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

/// Conjugate-symmetric coefficients, so the synthesized function is real.
fn real_sequence(h: usize, raw: &[(f64, f64)]) -> CoefficientSequence {
    let c = sequence(h, raw);
    CoefficientSequence::from_fn(h, |n| {
        if n == 0 {
            Complex64::new(c.get(0).re, 0.0)
        } else if n > 0 {
            c.get(n)
        } else {
            c.get(-n).conj()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analyze_inverts_synthesize(raw in coeff_vec(7), log_n in 4u32..8) {
        let grid = PeriodicGrid::one_d(1 << log_n).unwrap();
        let c = sequence(7, &raw);
        let back = analyze(&synthesize(&c, &grid).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&c) <= 1e-12 * c.max_abs().max(1e-300));
    }

    #[test]
    fn parseval(raw in coeff_vec(10)) {
        let grid = PeriodicGrid::one_d(64).unwrap();
        let c = sequence(10, &raw);
        let f = synthesize(&c, &grid).unwrap();
        let mean_sq = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        prop_assert!((mean_sq - c.energy()).abs() <= 1e-12 * c.energy().max(1e-300));
    }

    #[test]
    fn real_input_gives_symmetric_coefficients(raw in coeff_vec(9)) {
        let grid = PeriodicGrid::one_d(32).unwrap();
        let f = synthesize(&real_sequence(9, &raw), &grid).unwrap();
        prop_assert!(f.is_real());
        prop_assert!(analyze(&f).unwrap().is_conjugate_symmetric(1e-13));
    }

    #[test]
    fn fast_transform_matches_direct(raw in coeff_vec(6)) {
        let grid = PeriodicGrid::one_d(16).unwrap();
        let f = synthesize(&sequence(6, &raw), &grid).unwrap();
        let fast = analyze(&f).unwrap();
        let direct = reference::dft(&f).unwrap();
        prop_assert!(fast.max_abs_diff(&direct) < 1e-13);
    }

    #[test]
    fn convolution_matches_direct_sum(a in coeff_vec(5), b in coeff_vec(5)) {
        let grid = PeriodicGrid::one_d(32).unwrap();
        let f = synthesize(&sequence(5, &a), &grid).unwrap();
        let g = synthesize(&sequence(5, &b), &grid).unwrap();
        let fast = circular_convolve(&f, &g).unwrap();
        let direct = reference::convolve(&f, &g).unwrap();
        prop_assert!(fast.max_abs_diff(&direct).unwrap() < 1e-10);
        // coefficientwise 2π f̂ ĝ
        let c = analyze(&fast).unwrap();
        let (fa, gb) = (sequence(5, &a), sequence(5, &b));
        for n in -5..=5i64 {
            prop_assert!((c.get(n) - fa.get(n) * gb.get(n) * 2.0 * PI).norm() < 1e-10);
        }
    }

    #[test]
    fn heat_semigroup_law(raw in coeff_vec(12), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let grid = PeriodicGrid::one_d(64).unwrap();
        let f = synthesize(&real_sequence(12, &raw), &grid).unwrap();
        let lhs = theta_evolve(&theta_evolve(&f, t1).unwrap(), t2).unwrap();
        let rhs = theta_evolve(&f, t1 + t2).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        prop_assert!(lhs.is_real());
    }

    #[test]
    fn heat_and_poisson_contract(raw in coeff_vec(12), t in 0.01..3.0f64) {
        let grid = PeriodicGrid::one_d(64).unwrap();
        let f = synthesize(&real_sequence(12, &raw), &grid).unwrap();
        for u in [theta_evolve(&f, t).unwrap(), poisson_evolve_multiplier(&f, t).unwrap()] {
            for p in [1.0, 2.0, f64::INFINITY] {
                prop_assert!(u.lp_norm(p) <= f.lp_norm(p) + 1e-12);
            }
        }
    }

    #[test]
    fn theta_forms_agree(q in 0.0..0.95f64, x in -10.0..10.0f64) {
        let p = ThetaParams::new(q).unwrap();
        let scale = theta3_bound(&p);
        let s = theta3_series(x, &p);
        prop_assert!((s - theta3_product(x, &p)).abs() <= 1e-12 * scale);
        prop_assert!(s <= scale + 1e-15);
        prop_assert!(s >= -1e-12 * scale);
        // even and 2π-periodic
        prop_assert!((s - theta3_series(-x, &p)).abs() <= 1e-13 * scale);
        prop_assert!((s - theta3_series(x + 2.0 * PI, &p)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn ultra_evolution_composes(raw in coeff_vec(8), t1 in 0.0..1.5f64, t2 in 0.0..1.5f64) {
        let dist = UltraDistribution::from_coeffs(sequence(8, &raw).with_rule(Rule::power(1.5, 2)));
        let a = evolve_ultra(&evolve_ultra(&dist, t1).unwrap(), t2).unwrap();
        let b = evolve_ultra(&dist, t1 + t2).unwrap();
        prop_assert!(a.coeffs().max_abs_diff(b.coeffs()) <= 1e-15);
        for n in [9i64, 12, 20] {
            let (x, y) = (a.coeffs().ln_abs(n), b.coeffs().ln_abs(n));
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn inclusion_chain(q in 0.05..0.95f64, k in 1u32..5, c in 0.1..3.0f64,
                       shrink in prop::collection::vec(0.0..1.0f64, 21)) {
        let seq = CoefficientSequence::from_real_fn(10, |n| {
            c * q.powf((n.unsigned_abs() as f64).powi(k as i32)) * shrink[(n + 10) as usize]
        });
        let class = GrowthClass::test(q, k, c).unwrap();
        prop_assert!(check_membership(&seq, &class).member);
        prop_assert!(check_membership(&seq, &GrowthClass::test(q, 1, c).unwrap()).member);
    }

    #[test]
    fn membership_matches_direct_check(raw in coeff_vec(6), p in 1.01..4.0f64, k in 1u32..3) {
        let seq = sequence(6, &raw);
        let class = GrowthClass::dual(p, k, 1.0).unwrap();
        let direct = seq.indices().all(|n| {
            seq.get(n).norm() <= p.powf((n.unsigned_abs() as f64).powi(k as i32)) * (1.0 + 1e-12)
        });
        prop_assert_eq!(check_membership(&seq, &class).member, direct);
    }

    #[test]
    fn tail_estimate_bounds_wider_window(q in 0.1..0.9f64, k in 1u32..3) {
        let f = CoefficientSequence::from_rule(2, Rule::power(q, k)).unwrap();
        let p = pair(&UltraDistribution::comb(0), &f, 1e-9).unwrap();
        let m = 2 * p.last_index as i64;
        let mut wide = f.get(0);
        for j in 1..=m {
            wide += f.get(j) + f.get(-j);
        }
        let diff = (wide * 2.0 * PI - p.value).norm();
        // summation rounding on top of the truncation bound
        let rounding = 1e-14 * p.value.norm();
        prop_assert!(diff <= p.tail_estimate * (1.0 + 1e-9) + rounding, "{diff:e} {}", p.tail_estimate);
    }

    #[test]
    fn derivative_duality(raw in coeff_vec(5), m in 0u32..5) {
        let dist = UltraDistribution::from_coeffs(sequence(5, &raw).with_rule(Rule::power(1.2, 1)));
        let f = CoefficientSequence::from_rule(3, Rule::power(0.4, 2)).unwrap();
        let lhs = pair(&derivative_ultra(&dist, m), &f, 1e-15).unwrap().value;
        let rhs = pair(&dist, &derivative_coeffs(&f, m), 1e-15).unwrap().value;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((lhs - rhs * sign).norm() < 1e-10);
    }
}
