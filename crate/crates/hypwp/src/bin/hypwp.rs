use std::process::ExitCode;

use clap::Parser;
use hypwp::cli::{self, Cli, RunConfig};

fn main() -> ExitCode {
    cli::init_logging();
    let cli = Cli::parse();
    let cfg = RunConfig::from_cli(&cli);
    match cli::run(&cfg) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            if summary.failed_checks.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", summary.failed_checks.join(", "));
                ExitCode::from(summary.exit_code() as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
