use std::process::ExitCode;

use clap::Parser;
use radmin::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.command.args().quiet;
    match run(&cli.command) {
        Ok(output) => {
            if !quiet {
                println!("{}: {}", cli.command.name(), output.summary);
                for f in &output.files {
                    println!("  wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("radmin {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
