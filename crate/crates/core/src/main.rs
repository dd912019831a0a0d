use std::process::ExitCode;

fn main() -> ExitCode {
    isowalk::cli::run(std::env::args_os())
}
