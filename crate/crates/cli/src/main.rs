use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hyperqkd_cli::run(std::env::args_os().skip(1)))
}
