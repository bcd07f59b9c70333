use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(nwall_cli::run(std::env::args_os(), &mut io::stdout().lock()))
}
