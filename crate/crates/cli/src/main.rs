use std::process::ExitCode;

use clap::Parser;
use codeedu_eval::{check, run, summary, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok((result, files)) => {
                print!("{}", summary(&result));
                for f in files {
                    println!("wrote {}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Check { problems, m } => {
            let scratch = std::env::temp_dir().join(format!("codeedu-check-{}", std::process::id()));
            let outcome = check(problems.as_deref(), m, &scratch);
            let _ = std::fs::remove_dir_all(&scratch);
            match outcome {
                Ok(failing) if failing.is_empty() => {
                    println!("all reference solutions pass");
                    ExitCode::SUCCESS
                }
                Ok(failing) => {
                    for id in failing {
                        println!("FAIL {id}");
                    }
                    ExitCode::FAILURE
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
