use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = hrpn_cli::run(std::env::args_os());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(u8::try_from(outcome.code).unwrap_or(2))
}
