use std::io::{stderr, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let status = gcov_cli::run_command(&args, &mut stdout().lock(), &mut stderr().lock());
    ExitCode::from(status as u8)
}
