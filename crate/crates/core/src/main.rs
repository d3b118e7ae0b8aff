use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(otto_kiln::cli::run(std::env::args_os()))
}
