//! The `theta` command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input or arguments, 2 when a check
//! suite runs but has failing records. `THETA_TOL` overrides the default
//! tolerance of the command it applies to.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coeffs::CoefficientSequence;
use crate::error::{Error, Result};
use crate::fourier::{PeriodicGrid, SampledFunction};
use crate::io::{
    function_to_csv, load_function, load_ultra, parse_coeffs_json, parse_ultra_json, save_function,
    ultra_to_json,
};
use crate::quadrature::{bochner_scalar, QuadratureRule, SubordinationQuadrature};
use crate::semigroup::{
    poisson_evolve_d, poisson_evolve_d_subordinated, poisson_evolve_kernel, theta_evolve_d,
};
use crate::suite::{run_suite, Suite, DEFAULT_SEED};
use crate::theta::{kernel, theta3_product, theta3_series, ThetaParams};
use crate::ultradist::{
    check_membership, evolve_ultra, fit_growth, pair, ClassKind, GrowthClass, DEFAULT_PAIR_TOL,
};

pub const TOL_ENV: &str = "THETA_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "theta",
    version,
    about = "Heat and Poisson semigroups on the torus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Theta function values and sampled kernels.
    #[command(subcommand)]
    Theta(ThetaCommand),
    /// Heat evolution of a sampled function.
    Heat(EvolveArgs),
    /// Poisson evolution of a sampled function.
    Poisson(PoissonArgs),
    /// Subordinated evolution, or the scalar identity when no input is given.
    Subordinate(SubordinateArgs),
    /// Run a property-check suite.
    Check(CheckArgs),
    /// Ultra-distribution operations.
    #[command(subcommand)]
    Ultra(UltraCommand),
}

#[derive(Debug, Subcommand)]
pub enum ThetaCommand {
    /// Evaluate θ₃(x, q).
    Eval(EvalArgs),
    /// Sample K_t on a grid and write it as CSV.
    Kernel(KernelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Series,
    Product,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Nome, 0 <= q < 1.
    #[arg(long, conflicts_with = "t", required_unless_present = "t")]
    pub q: Option<f64>,
    /// Diffusion time, q = e^{-t}.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum, default_value = "series")]
    pub form: Form,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PoissonMethod {
    Multiplier,
    Kernel,
    Subordination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    LogGaussLegendre,
    GaussLegendre,
    Adaptive,
}

impl From<RuleArg> for QuadratureRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::LogGaussLegendre => QuadratureRule::LogGaussLegendre,
            RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
            RuleArg::Adaptive => QuadratureRule::Adaptive,
        }
    }
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value = "log-gauss-legendre")]
    pub rule: RuleArg,
    /// Requested quadrature accuracy (default from THETA_TOL, else 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub evolve: EvolveArgs,
    #[arg(long, value_enum, default_value = "multiplier")]
    pub method: PoissonMethod,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct SubordinateArgs {
    /// Time t; with no input this is λ in the scalar identity.
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub suite: Suite,
    /// Grid points per axis (default 256 for thm1, 64 otherwise).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassArgs {
    #[arg(long)]
    pub kind: Option<ClassKind>,
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Debug, Subcommand)]
pub enum UltraCommand {
    /// Test a distribution against a growth class (the declared one by default).
    CheckMembership {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Apply the heat semigroup in coefficient space.
    Evolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair a distribution with a test function.
    Pair {
        #[arg(long)]
        input: PathBuf,
        /// Test function: ultra-distribution JSON or a coefficient array.
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fit a growth class to the stored window.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
}

/// What a successful run produced.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Done,
    SuiteFailed,
}

/// `THETA_TOL` if set, otherwise `default`.
pub fn env_tol(default: f64) -> Result<f64> {
    match std::env::var(TOL_ENV) {
        Ok(s) => {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{TOL_ENV}={s:?} is not a number")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidTolerance(v));
            }
            Ok(v)
        }
        Err(_) => Ok(default),
    }
}

fn pick_tol(flag: Option<f64>, default: f64) -> Result<f64> {
    match flag {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::InvalidTolerance(v)),
        None => env_tol(default),
    }
}

fn quadrature(args: &QuadArgs) -> Result<SubordinationQuadrature> {
    let quad = SubordinationQuadrature {
        rule: args.rule.into(),
        tol: pick_tol(args.tol, SubordinationQuadrature::default().tol)?,
        ..SubordinationQuadrature::with_nodes(args.nodes)
    };
    quad.validate()?;
    Ok(quad)
}

fn emit_function(f: &SampledFunction, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => save_function(f, path),
        None => Ok(stdout.write_all(function_to_csv(f).as_bytes())?),
    }
}

fn emit_text(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => Ok(writeln!(stdout, "{text}")?),
    }
}

fn load_test_function(path: &PathBuf) -> Result<CoefficientSequence> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        parse_coeffs_json(&text)
    } else {
        Ok(parse_ultra_json(&text)?.coeffs().clone())
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Theta(ThetaCommand::Eval(a)) => {
            let p = match (a.q, a.t) {
                (Some(q), _) => ThetaParams::new(q)?,
                (None, Some(t)) => ThetaParams::from_time(t)?,
                (None, None) => return Err(Error::InvalidArgument("need --q or --t".into())),
            };
            let p = p.with_tol(pick_tol(a.tol, p.tol())?)?;
            let v = match a.form {
                Form::Series => theta3_series(a.x, &p),
                Form::Product => theta3_product(a.x, &p),
            };
            writeln!(stdout, "{v:.17e}")?;
        }
        Command::Theta(ThetaCommand::Kernel(a)) => {
            let grid = PeriodicGrid::cube(a.d, a.n)?;
            emit_function(&kernel(a.t, &grid)?, a.out.as_ref(), stdout)?;
        }
        Command::Heat(a) => {
            let f = load_function(&a.init)?;
            emit_function(&theta_evolve_d(&f, a.t)?, a.out.as_ref(), stdout)?;
        }
        Command::Poisson(a) => {
            let f = load_function(&a.evolve.init)?;
            let t = a.evolve.t;
            let u = match a.method {
                PoissonMethod::Multiplier => poisson_evolve_d(&f, t)?,
                PoissonMethod::Kernel => poisson_evolve_kernel(&f, t)?,
                PoissonMethod::Subordination => {
                    poisson_evolve_d_subordinated(&f, t, &quadrature(&a.quad)?)?
                }
            };
            emit_function(&u, a.evolve.out.as_ref(), stdout)?;
        }
        Command::Subordinate(a) => {
            let quad = quadrature(&a.quad)?;
            match &a.init {
                Some(path) => {
                    let f = load_function(path)?;
                    let u = poisson_evolve_d_subordinated(&f, a.t, &quad)?;
                    emit_function(&u, a.out.as_ref(), stdout)?;
                }
                None => {
                    let v = bochner_scalar(a.t, &quad)?;
                    let exact = (-a.t).exp();
                    let text = format!(
                        "quadrature {v:.17e}\nexp(-t)    {exact:.17e}\nrelative   {:.3e}",
                        ((v - exact) / exact).abs()
                    );
                    emit_text(&text, a.out.as_ref(), stdout)?;
                }
            }
        }
        Command::Check(a) => {
            let n = a.n.unwrap_or(a.suite.default_n());
            let report = run_suite(a.suite, n, a.seed)?;
            if let Some(path) = &a.report {
                fs::write(path, report.to_json())?;
            }
            write!(stdout, "{}", report.table())?;
            if !report.all_pass() {
                return Ok(Outcome::SuiteFailed);
            }
        }
        Command::Ultra(cmd) => ultra(cmd, stdout)?,
    }
    Ok(Outcome::Done)
}

fn ultra(cmd: &UltraCommand, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        UltraCommand::CheckMembership { input, class } => {
            let dist = load_ultra(input)?;
            let g = match (class.kind, class.base, class.k) {
                (Some(kind), Some(base), Some(k)) => GrowthClass::new(kind, base, k, class.c)?,
                (None, None, None) => *dist.declared_class().ok_or_else(|| {
                    Error::InvalidArgument("no declared class; pass --kind --base --k".into())
                })?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "--kind, --base and --k go together".into(),
                    ))
                }
            };
            let m = check_membership(dist.coeffs(), &g);
            let doc = serde_json::json!({
                "member": m.member,
                "witness": {"n": m.witness_index, "ratio": m.witness_ratio},
                "scanned_to": m.scanned_to,
                "class": g,
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        UltraCommand::Evolve { input, t, out } => {
            let evolved = evolve_ultra(&load_ultra(input)?, *t)?;
            emit_text(&ultra_to_json(&evolved), out.as_ref(), stdout)?;
        }
        UltraCommand::Pair { input, test, tol } => {
            let dist = load_ultra(input)?;
            let f = load_test_function(test)?;
            let p = pair(&dist, &f, pick_tol(*tol, DEFAULT_PAIR_TOL)?)?;
            let doc = serde_json::json!({
                "re": p.value.re,
                "im": p.value.im,
                "tail_estimate": p.tail_estimate,
                "last_index": p.last_index,
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        UltraCommand::Fit { input, k } => {
            let fit = fit_growth(load_ultra(input)?.coeffs(), *k)?;
            let doc = serde_json::json!({"class": fit.class, "degenerate": fit.degenerate});
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and maps the result to an exit status.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::SuiteFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> (Result<Outcome>, String) {
        let cli =
            Cli::try_parse_from(std::iter::once("theta").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let r = execute(&cli, &mut out);
        (r, String::from_utf8(out).unwrap())
    }

    #[test]
    fn eval_series_and_product() {
        let (r, out) = exec(&["theta", "eval", "--x", "0", "--q", "0.5"]);
        assert_eq!(r.unwrap(), Outcome::Done);
        let v: f64 = out.trim().parse().unwrap();
        assert!((v - 2.128_936_827_211_877).abs() < 1e-14);
        let (_, out) = exec(&[
            "theta", "eval", "--x", "-1", "--t", "1", "--form", "product",
        ]);
        assert!(out.trim().parse::<f64>().is_ok());
    }

    #[test]
    fn eval_rejects_bad_nome() {
        let (r, _) = exec(&["theta", "eval", "--x", "0", "--q", "1.0"]);
        assert!(matches!(r, Err(Error::NomeOutOfRange(_))));
    }

    #[test]
    fn q_and_t_conflict() {
        let r = Cli::try_parse_from([
            "theta", "theta", "eval", "--x", "0", "--q", "0.5", "--t", "1",
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn scalar_subordination() {
        let (r, out) = exec(&["subordinate", "--t", "1"]);
        assert_eq!(r.unwrap(), Outcome::Done);
        assert!(out.contains("3.6787944117"));
    }
}
