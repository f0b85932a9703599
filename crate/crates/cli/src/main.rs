use std::process::ExitCode;

use adqc_sim::{run, Cli, Outcome};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Printed(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Ran { summary, .. }) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("adqc-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
