use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::Parser;
use tm_core::cli::{color_from_env, run, RunConfig};

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let to_terminal = cfg.out.is_none() && std::io::stdout().is_terminal();
    let outcome = run(&cfg, color_from_env(to_terminal));
    eprint!("{}", outcome.stderr);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.stdout) {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
        }
    }
    ExitCode::from(outcome.code as u8)
}
