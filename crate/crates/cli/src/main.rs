use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use rigmatch_cli::{run, Cli, EXIT_COMPLETE, EXIT_USAGE};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_COMPLETE,
                _ => EXIT_USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(f) => {
            eprintln!("rigmatch: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
