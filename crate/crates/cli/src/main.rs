use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tlsub::run(std::env::args_os()))
}
