use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = entis_cli::Cli::parse();
    match entis_cli::run(cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
