use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(filter_ergodics::cli::run(std::env::args_os()) as u8)
}
