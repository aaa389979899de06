use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cca_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let result = run(&cli, &mut out, &mut err);
    let _ = out.flush();
    if let Err(e) = &result {
        let _ = writeln!(err, "error: {e:#}");
    }
    ExitCode::from(exit_code(&result))
}
