//! Two-sided coefficient sequences: a finite window `n = -N..=N` plus an
//! optional closed-form rule for the modes beyond it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn is_zero_f(v: &f64) -> bool {
    *v == 0.0
}

fn is_zero_u(v: &u32) -> bool {
    *v == 0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// Closed-form coefficients outside the stored window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rule {
    /// `scale · (in)^derivative · base^{|n|^k} · e^{-n² heat_time}`.
    Power {
        base: f64,
        k: u32,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "is_zero_f")]
        heat_time: f64,
        #[serde(default, skip_serializing_if = "is_zero_u")]
        derivative: u32,
    },
}

impl Rule {
    pub fn power(base: f64, k: u32) -> Self {
        Rule::Power {
            base,
            k,
            scale: 1.0,
            heat_time: 0.0,
            derivative: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Rule::Power {
            base,
            k,
            scale,
            heat_time,
            ..
        } = *self;
        if !(base >= 0.0 && base.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rule base {base} must be >= 0"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("rule order k must be >= 1".into()));
        }
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rule scale {scale} must be >= 0"
            )));
        }
        if !(heat_time >= 0.0 && heat_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rule heat_time {heat_time} must be >= 0"
            )));
        }
        Ok(())
    }

    /// `ln |value(n)|`, `-inf` for a zero coefficient.
    pub fn ln_abs(&self, n: i64) -> f64 {
        let Rule::Power {
            base,
            k,
            scale,
            heat_time,
            derivative,
        } = *self;
        if scale == 0.0 || base == 0.0 {
            return f64::NEG_INFINITY;
        }
        let m = n.unsigned_abs() as f64;
        if derivative > 0 && m == 0.0 {
            return f64::NEG_INFINITY;
        }
        let growth = if base == 1.0 {
            0.0
        } else {
            m.powi(k as i32) * base.ln()
        };
        let poly = if derivative > 0 {
            derivative as f64 * m.ln()
        } else {
            0.0
        };
        scale.ln() + poly + growth - m * m * heat_time
    }

    /// Unit phase `i^d · sign(n)^d` of the derivative factor.
    fn phase(&self, n: i64) -> Complex64 {
        let Rule::Power { derivative, .. } = *self;
        let mut p = Complex64::new(1.0, 0.0);
        let step = if n < 0 {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        for _ in 0..derivative {
            p *= step;
        }
        p
    }

    pub fn value(&self, n: i64) -> Complex64 {
        let l = self.ln_abs(n);
        if l == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        self.phase(n) * l.exp()
    }

    /// Leading growth `(k, ln base - [k = 2] heat_time)` of `ln|value(n)|`
    /// as `|n| → ∞`, ignoring the polynomial derivative factor. A zero rule
    /// returns `None`.
    pub(crate) fn asymptotics(&self) -> Option<Vec<(u32, f64)>> {
        let Rule::Power {
            base,
            k,
            scale,
            heat_time,
            ..
        } = *self;
        if scale == 0.0 || base == 0.0 {
            return None;
        }
        let mut terms = vec![];
        if base != 1.0 {
            terms.push((k, base.ln()));
        }
        if heat_time != 0.0 {
            terms.push((2, -heat_time));
        }
        Some(terms)
    }
}

/// Fourier coefficients `c_n`, stored for `-N..=N` (`N` the halfwidth).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    halfwidth: usize,
    coeffs: Vec<Complex64>,
    rule: Option<Rule>,
}

impl CoefficientSequence {
    pub fn new(halfwidth: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * halfwidth + 1 {
            return Err(Error::LengthMismatch {
                expected: 2 * halfwidth + 1,
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            halfwidth,
            coeffs,
            rule: None,
        })
    }

    pub fn from_fn(halfwidth: usize, f: impl FnMut(i64) -> Complex64) -> Self {
        let h = halfwidth as i64;
        Self {
            halfwidth,
            coeffs: (-h..=h).map(f).collect(),
            rule: None,
        }
    }

    pub fn from_real_fn(halfwidth: usize, mut f: impl FnMut(i64) -> f64) -> Self {
        Self::from_fn(halfwidth, |n| Complex64::new(f(n), 0.0))
    }

    /// A sequence given entirely by `rule`; the window is materialised from it.
    pub fn from_rule(halfwidth: usize, rule: Rule) -> Result<Self> {
        rule.validate()?;
        Ok(Self::from_fn(halfwidth, |n| rule.value(n)).with_rule(rule))
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = Some(rule);
        self
    }

    pub fn without_rule(mut self) -> Self {
        self.rule = None;
        self
    }

    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    pub fn rule(&self) -> Option<&Rule> {
        self.rule.as_ref()
    }

    /// Window coefficients in index order `-N..=N`.
    pub fn window(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        -(self.halfwidth as i64)..=self.halfwidth as i64
    }

    pub fn in_window(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.halfwidth
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if self.in_window(n) {
            self.coeffs[(n + self.halfwidth as i64) as usize]
        } else if let Some(r) = &self.rule {
            r.value(n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `ln |c_n|`, computed without overflow for rule-driven modes.
    pub fn ln_abs(&self, n: i64) -> f64 {
        if self.in_window(n) {
            let v = self.get(n).norm();
            if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                v.ln()
            }
        } else if let Some(r) = &self.rule {
            r.ln_abs(n)
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Maps the window coefficients; the rule is carried over unchanged.
    pub fn map_window(&self, g: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .indices()
            .zip(&self.coeffs)
            .map(|(n, &c)| g(n, c))
            .collect();
        Self {
            halfwidth: self.halfwidth,
            coeffs,
            rule: self.rule.clone(),
        }
    }

    pub(crate) fn set_rule(&mut self, rule: Option<Rule>) {
        self.rule = rule;
    }

    /// `c_{-n} = conj(c_n)` on the window, relative to the largest entry.
    pub fn is_conjugate_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let h = self.halfwidth as i64;
        (0..=h).all(|n| (self.get(n) - self.get(-n).conj()).norm() <= rel_tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |c_n|²` over the window.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|a_n - b_n|` over the union of the two windows.
    pub fn max_abs_diff(&self, other: &CoefficientSequence) -> f64 {
        let h = self.halfwidth.max(other.halfwidth) as i64;
        (-h..=h)
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_and_rule_lookup() {
        let c = CoefficientSequence::from_real_fn(2, |n| n as f64).with_rule(Rule::power(0.5, 1));
        assert_eq!(c.get(-2).re, -2.0);
        assert!((c.get(3).re - 0.125).abs() < 1e-15);
        assert!((c.get(-3).re - 0.125).abs() < 1e-15);
        let bare = c.clone().without_rule();
        assert_eq!(bare.get(3), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rule_log_magnitude_avoids_overflow() {
        let r = Rule::power(2.0, 2);
        assert!(r.value(40).re.is_infinite());
        assert!((r.ln_abs(40) - 1600.0 * 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn derivative_phase() {
        let r = Rule::Power {
            base: 1.0,
            k: 1,
            scale: 1.0,
            heat_time: 0.0,
            derivative: 1,
        };
        assert!((r.value(3) - Complex64::new(0.0, 3.0)).norm() < 1e-14);
        assert!((r.value(-3) - Complex64::new(0.0, -3.0)).norm() < 1e-14);
        assert_eq!(r.value(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn comb_rule_is_constant() {
        let r = Rule::power(1.0, 7);
        assert_eq!(r.value(1000).re, 1.0);
    }

    #[test]
    fn length_checked() {
        assert!(CoefficientSequence::new(2, vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn rule_json_shape() {
        let s = serde_json::to_string(&Rule::power(2.0, 1)).unwrap();
        assert_eq!(s, r#"{"type":"power","base":2.0,"k":1}"#);
        let r: Rule =
            serde_json::from_str(r#"{"type":"power","base":0.5,"k":2,"heat_time":1.0}"#).unwrap();
        assert!((r.ln_abs(1) - (0.5f64.ln() - 1.0)).abs() < 1e-15);
    }
}
