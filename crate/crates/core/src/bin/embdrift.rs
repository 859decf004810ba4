use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(embdrift::cli::run(std::env::args_os()))
}
