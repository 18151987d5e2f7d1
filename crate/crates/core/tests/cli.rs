use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use theta_semigroup::fourier::{PeriodicGrid, SampledFunction};
use theta_semigroup::io::{function_to_csv, load_function};

fn theta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theta"))
        .args(args)
        .env_remove("THETA_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_fn(dir: &Path, name: &str, f: impl Fn(f64) -> f64) -> String {
    let grid = PeriodicGrid::one_d(64).unwrap();
    let s = SampledFunction::from_fn(grid, |x| f(x[0]));
    let path = dir.join(name);
    fs::write(&path, function_to_csv(&s)).unwrap();
    path.to_str().unwrap().to_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn heat_preserves_constants() {
    let dir = TempDir::new().unwrap();
    let init = write_fn(dir.path(), "const.csv", |_| 1.0);
    let out = p(dir.path(), "out.csv");
    let o = theta(&["heat", "--init", &init, "--t", "0.7", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let u = load_function(Path::new(&out)).unwrap();
    assert!(u
        .values()
        .iter()
        .all(|v| (v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12));
}

#[test]
fn poisson_methods_damp_cosine() {
    let dir = TempDir::new().unwrap();
    let init = write_fn(dir.path(), "cos.csv", f64::cos);
    let amp = (-0.8f64).exp();
    for method in ["multiplier", "kernel", "subordination"] {
        let out = p(dir.path(), &format!("{method}.csv"));
        let o = theta(&[
            "poisson", "--init", &init, "--t", "0.8", "--method", method, "--out", &out,
        ]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
        let u = load_function(Path::new(&out)).unwrap();
        let xs = u.grid().axis_points(0);
        let worst = xs
            .iter()
            .zip(u.values())
            .map(|(x, v)| (v.re - amp * x.cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{method}: {worst:e}");
    }
}

#[test]
fn check_report_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(dir.path(), "a.json"), p(dir.path(), "b.json"));
    for path in [&a, &b] {
        let o = theta(&["check", "--suite", "thm1", "--n", "256", "--report", path]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("semigroup_law"));
    }
    let (ra, rb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let doc: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(doc["suite"], "thm1");
    assert!(doc["records"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["pass"] == true));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = TempDir::new().unwrap();
    let init = p(dir.path(), "bad.csv");
    fs::write(&init, "x,re,im\n0,1,0\n0.5,oops,0\n").unwrap();
    let o = theta(&["heat", "--init", &init, "--t", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(theta(&["heat", "--t", "1"]).status.code(), Some(1));
    assert_eq!(
        theta(&["theta", "eval", "--x", "0", "--q", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(theta(&["--help"]).status.code(), Some(0));
}

#[test]
fn tolerance_from_environment() {
    let run = |tol: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_theta"));
        cmd.args(["subordinate", "--t", "1", "--nodes", "8"])
            .env_remove("THETA_TOL");
        if let Some(t) = tol {
            cmd.env("THETA_TOL", t);
        }
        cmd.output().unwrap()
    };
    // 8 nodes cannot meet the default tolerance but do meet a loose one
    assert_eq!(run(None).status.code(), Some(1));
    let loose = run(Some("1e-2"));
    assert!(loose.status.success(), "{}", stderr(&loose));
    assert_eq!(run(Some("-1")).status.code(), Some(1));
    assert_eq!(run(Some("abc")).status.code(), Some(1));
}

#[test]
fn theta_eval_prints_value() {
    let o = theta(&["theta", "eval", "--x", "0", "--q", "0.5"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2.128_936_827_211_877).abs() < 1e-14);
}

#[test]
fn kernel_has_unit_mass() {
    let o = theta(&["theta", "kernel", "--t", "0.3", "--n", "128"]);
    assert!(o.status.success());
    let k = theta_semigroup::io::parse_function_csv(&stdout(&o)).unwrap();
    let mass: f64 =
        k.values().iter().map(|v| v.re).sum::<f64>() * 2.0 * std::f64::consts::PI / 128.0;
    assert!((mass - 1.0).abs() < 1e-12);
}

const COMB: &str = r#"{"window": [{"n": 0, "re": 1, "im": 0}], "rule": {"type": "power", "base": 1.0, "k": 1},
  "class": {"kind": "dual", "base": 1.5, "k": 1, "c": 1}}"#;

#[test]
fn ultra_commands() {
    let dir = TempDir::new().unwrap();
    let comb = p(dir.path(), "comb.json");
    fs::write(&comb, COMB).unwrap();

    let o = theta(&["ultra", "check-membership", "--input", &comb]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["member"], true);

    let test = p(dir.path(), "test.json");
    fs::write(&test, r#"[{"n": 0, "re": 1, "im": 0}]"#).unwrap();
    let o = theta(&["ultra", "pair", "--input", &comb, "--test", &test]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let re = doc["re"].as_f64().unwrap();
    assert!((re - 2.0 * std::f64::consts::PI).abs() < 1e-12);

    let evolved = p(dir.path(), "evolved.json");
    let o = theta(&[
        "ultra", "evolve", "--input", &comb, "--t", "0.5", "--out", &evolved,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d = theta_semigroup::io::load_ultra(Path::new(&evolved)).unwrap();
    assert!((d.coeffs().get(3).re - (-4.5f64).exp()).abs() < 1e-15);

    // fitting reads only the stored window
    let o = theta(&["ultra", "fit", "--input", &comb]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("too small"));

    let entries: Vec<String> = (-8..=8i32)
        .map(|n| format!(r#"{{"n": {n}, "re": {}, "im": 0}}"#, 2f64.powi(n.abs())))
        .collect();
    let grow = p(dir.path(), "grow.json");
    fs::write(&grow, format!(r#"{{"window": [{}]}}"#, entries.join(","))).unwrap();
    let o = theta(&["ultra", "fit", "--input", &grow]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["class"]["kind"], "dual");
    assert!((doc["class"]["base"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}
