use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use overlap_quant::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.command.source().out.clone();
    match run(&cli) {
        Ok(outcome) => {
            let written = match &out_path {
                Some(path) => std::fs::write(path, &outcome.csv).map(|_| {
                    print!("{}", outcome.summary);
                    println!("wrote {}", path.display());
                }),
                None => {
                    eprint!("{}", outcome.summary);
                    std::io::stdout().write_all(outcome.csv.as_bytes())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
