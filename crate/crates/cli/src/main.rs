use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spectral_gap_lab::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            let _ = stdout.flush();
            if outcome.code != 0 {
                eprintln!("spectral-gap-lab: exit {}", outcome.code);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("spectral-gap-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
