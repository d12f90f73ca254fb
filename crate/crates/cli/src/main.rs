use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(carnot_bcp_cli::run_from(std::env::args_os()))
}
