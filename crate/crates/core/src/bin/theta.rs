use std::process::ExitCode;

fn main() -> ExitCode {
    theta_semigroup::cli::run(std::env::args_os())
}
