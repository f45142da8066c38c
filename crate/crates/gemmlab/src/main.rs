use std::process::ExitCode;

fn main() -> ExitCode {
    gemmlab::cli::run()
}
