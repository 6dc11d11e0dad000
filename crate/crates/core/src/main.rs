use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(heatdgg::cli::run(std::env::args_os()))
}
