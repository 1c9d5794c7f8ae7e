use clap::error::ErrorKind;
use clap::Parser;
use hmrkit::cli::{run, Cli, EXIT_OK, EXIT_USAGE};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let quiet = cli.quiet;
    match run(&cli) {
        Ok(outcome) => {
            if !quiet {
                for path in &outcome.artifacts {
                    println!("wrote {}", path.display());
                }
                println!("{}", outcome.summary);
            }
            std::process::exit(EXIT_OK);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
