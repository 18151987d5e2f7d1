//! File formats.
//!
//! * Sampled functions: CSV with header `x,re,im` (1-d) or `x1,…,xd,re,im`,
//!   one row per grid point in lexicographic order (last axis fastest).
//!   Values are written with 17 significant digits, so save/load is lossless.
//! * Coefficients: JSON array of `{"n": .., "re": .., "im": ..}`.
//! * Ultra-distributions: JSON object
//!   `{"window": [{n, re, im}], "rule": {"type": "power", ..} | "none", "class": {kind, base, k, c} | null}`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSequence, Rule};
use crate::error::{Error, Result};
use crate::fourier::{PeriodicGrid, SampledFunction, ValueKind};
use crate::ultradist::{GrowthClass, UltraDistribution};

/// Largest coefficient index accepted from JSON input.
pub const MAX_HALFWIDTH: usize = 1 << 20;

/// Tolerance on grid coordinates read back from CSV.
const COORD_TOL: f64 = 1e-9;

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a sampled function. Line numbers in errors count the header as line 1.
pub fn parse_function_csv(text: &str) -> Result<SampledFunction> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let cols = header.len();
    if cols < 3 || header[cols - 2] != "re" || header[cols - 1] != "im" {
        return Err(parse_err(1, "header must be x,re,im or x1,...,xd,re,im"));
    }
    let d = cols - 2;
    let coord_ok = if d == 1 {
        header[0] == "x"
    } else {
        (0..d).all(|a| header[a] == format!("x{}", a + 1))
    };
    if !coord_ok {
        return Err(parse_err(
            1,
            format!("unexpected coordinate columns in header {header:?}"),
        ));
    }

    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != cols {
            return Err(parse_err(
                line,
                format!("expected {cols} fields, found {}", rec.len()),
            ));
        }
        let mut row = Vec::with_capacity(cols);
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value {field:?}")));
            }
            row.push(v);
        }
        values.push(Complex64::new(row[d], row[d + 1]));
        row.truncate(d);
        coords.push(row);
    }
    if coords.is_empty() {
        return Err(parse_err(2, "no data rows"));
    }

    // axis sizes from the distinct coordinate values
    let mut sizes = Vec::with_capacity(d);
    for a in 0..d {
        let mut xs: Vec<f64> = coords.iter().map(|r| r[a]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|b, a| (*b - *a).abs() < COORD_TOL);
        sizes.push(xs.len());
    }
    let expected_rows = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    if expected_rows != Some(coords.len()) {
        return Err(parse_err(
            coords.len() as u64 + 1,
            format!(
                "{} rows do not form a full grid of sizes {sizes:?}",
                coords.len()
            ),
        ));
    }
    let grid = PeriodicGrid::new(sizes.clone()).map_err(|e| parse_err(2, e.to_string()))?;
    for (i, row) in coords.iter().enumerate() {
        let idx = grid.unravel(i);
        for a in 0..d {
            let expect = 2.0 * PI * idx[a] as f64 / sizes[a] as f64;
            if (row[a] - expect).abs() > COORD_TOL {
                return Err(parse_err(
                    i as u64 + 2,
                    format!(
                        "grid spacing inconsistent: column {} is {}, expected {expect}",
                        header[a], row[a]
                    ),
                ));
            }
        }
    }
    let kind = if values.iter().all(|v| v.im == 0.0) {
        ValueKind::Real
    } else {
        ValueKind::Complex
    };
    SampledFunction::new(grid, values, kind)
}

pub fn function_to_csv(f: &SampledFunction) -> String {
    let grid = f.grid();
    let d = grid.dims();
    let mut out = String::new();
    if d == 1 {
        out.push_str("x,");
    } else {
        for a in 1..=d {
            out.push_str(&format!("x{a},"));
        }
    }
    out.push_str("re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        for x in grid.point(i) {
            out.push_str(&format!("{x:.16e},"));
        }
        out.push_str(&format!("{:.16e},{:.16e}\n", v.re, v.im));
    }
    out
}

pub fn load_function(path: impl AsRef<Path>) -> Result<SampledFunction> {
    parse_function_csv(&fs::read_to_string(path)?)
}

pub fn save_function(f: &SampledFunction, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, function_to_csv(f))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEntry {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

/// Nonzero entries plus both window endpoints, so the halfwidth survives.
fn entries(c: &CoefficientSequence) -> Vec<CoeffEntry> {
    let h = c.halfwidth() as i64;
    c.indices()
        .filter_map(|n| {
            let v = c.get(n);
            let zero = v.re.to_bits() == 0 && v.im.to_bits() == 0;
            (!zero || n.abs() == h).then_some(CoeffEntry {
                n,
                re: v.re,
                im: v.im,
            })
        })
        .collect()
}

/// Builds a window from sparse entries; missing indices are zero.
fn window_from_entries(list: &[CoeffEntry]) -> Result<CoefficientSequence> {
    let h = list.iter().map(|e| e.n.unsigned_abs()).max().unwrap_or(0);
    if h > MAX_HALFWIDTH as u64 {
        return Err(Error::InvalidArgument(format!(
            "coefficient index {h} exceeds {MAX_HALFWIDTH}"
        )));
    }
    let h = h as usize;
    let mut coeffs = vec![None; 2 * h + 1];
    for e in list {
        let slot = &mut coeffs[(e.n + h as i64) as usize];
        if slot.is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate coefficient index {}",
                e.n
            )));
        }
        *slot = Some(Complex64::new(e.re, e.im));
    }
    CoefficientSequence::new(
        h,
        coeffs
            .into_iter()
            .map(|c| c.unwrap_or(Complex64::new(0.0, 0.0)))
            .collect(),
    )
}

pub fn coeffs_to_json(c: &CoefficientSequence) -> String {
    serde_json::to_string_pretty(&entries(c)).expect("plain data serializes")
}

pub fn parse_coeffs_json(text: &str) -> Result<CoefficientSequence> {
    let list: Vec<CoeffEntry> = serde_json::from_str(text)?;
    window_from_entries(&list)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
enum NoRule {
    #[serde(rename = "none")]
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RuleField {
    None(NoRule),
    Rule(Rule),
}

impl Default for RuleField {
    fn default() -> Self {
        RuleField::None(NoRule::None)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UltraJson {
    window: Vec<CoeffEntry>,
    #[serde(default)]
    rule: RuleField,
    #[serde(default)]
    class: Option<GrowthClass>,
}

pub fn parse_ultra_json(text: &str) -> Result<UltraDistribution> {
    let doc: UltraJson = serde_json::from_str(text)?;
    let mut coeffs = window_from_entries(&doc.window)?;
    if let RuleField::Rule(rule) = doc.rule {
        rule.validate()?;
        coeffs = coeffs.with_rule(rule);
    }
    UltraDistribution::new(coeffs, doc.class)
}

pub fn ultra_to_json(u: &UltraDistribution) -> String {
    let doc = UltraJson {
        window: entries(u.coeffs()),
        rule: u
            .coeffs()
            .rule()
            .cloned()
            .map(RuleField::Rule)
            .unwrap_or_default(),
        class: u.declared_class().copied(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn load_ultra(path: impl AsRef<Path>) -> Result<UltraDistribution> {
    parse_ultra_json(&fs::read_to_string(path)?)
}

pub fn load_coeffs(path: impl AsRef<Path>) -> Result<CoefficientSequence> {
    parse_coeffs_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bitwise() {
        let g = PeriodicGrid::one_d(8).unwrap();
        let f = SampledFunction::from_fn(g, |x| (x[0] * 0.37).sin() / 3.0);
        let back = parse_function_csv(&function_to_csv(&f)).unwrap();
        assert_eq!(back.values(), f.values());
        assert!(back.is_real());
    }

    #[test]
    fn csv_two_dims_order() {
        let g = PeriodicGrid::new(vec![4, 6]).unwrap();
        let f = SampledFunction::from_fn(g, |x| x[0] + 10.0 * x[1]);
        let text = function_to_csv(&f);
        assert!(text.starts_with("x1,x2,re,im\n"));
        let back = parse_function_csv(&text).unwrap();
        assert_eq!(back.grid().sizes(), &[4, 6]);
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn csv_rejects_perturbed_grid() {
        let g = PeriodicGrid::one_d(4).unwrap();
        let text = function_to_csv(&SampledFunction::constant(g, 1.0));
        let bad = text.replacen("1.5707963267948966e0", "1.6e0", 1);
        match parse_function_csv(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_reports_bad_number_line() {
        let text = "x,re,im\n0,1,0\n1.5707963267948966,abc,0\n";
        match parse_function_csv(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_function_csv("t,re,im\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn coeff_json_round_trip() {
        let c = CoefficientSequence::from_fn(3, |n| Complex64::new(n as f64, 0.5));
        let back = parse_coeffs_json(&coeffs_to_json(&c)).unwrap();
        assert_eq!(back, c);
        let sparse = parse_coeffs_json(r#"[{"n":2,"re":1,"im":0}]"#).unwrap();
        assert_eq!(sparse.halfwidth(), 2);
        assert_eq!(sparse.get(0), Complex64::new(0.0, 0.0));
        assert!(parse_coeffs_json(r#"[{"n":1,"re":1,"im":0},{"n":1,"re":2,"im":0}]"#).is_err());
        assert!(parse_coeffs_json(r#"[{"n":4000000000,"re":1,"im":0}]"#).is_err());
    }

    #[test]
    fn ultra_json_round_trip() {
        let text = r#"{"window":[{"n":-1,"re":2,"im":0},{"n":0,"re":1,"im":0},{"n":1,"re":2,"im":0}],
            "rule":{"type":"power","base":2.0,"k":1},
            "class":{"kind":"dual","base":2.0,"k":1,"c":1.0}}"#;
        let u = parse_ultra_json(text).unwrap();
        assert_eq!(u.coeffs().get(5).re, 32.0);
        let again = parse_ultra_json(&ultra_to_json(&u)).unwrap();
        assert_eq!(again, u);

        let bare =
            parse_ultra_json(r#"{"window":[{"n":0,"re":1,"im":0}],"rule":"none","class":null}"#)
                .unwrap();
        assert!(bare.coeffs().rule().is_none());
        assert!(ultra_to_json(&bare).contains("\"none\""));
    }

    #[test]
    fn ultra_json_rejects_violated_class() {
        let text = r#"{"window":[{"n":1,"re":3,"im":0}],"rule":"none",
            "class":{"kind":"dual","base":2.0,"k":1,"c":1.0}}"#;
        assert!(matches!(
            parse_ultra_json(text),
            Err(Error::InvalidClass(_))
        ));
    }
}
