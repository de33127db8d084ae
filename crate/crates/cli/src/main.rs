use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wordify_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // unlocked: `serve` logs to stdout from other threads
    let mut out = std::io::stdout();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
