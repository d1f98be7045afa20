use clap::error::ErrorKind;
use clap::Parser;

use reclasso_cli::args::Cli;
use reclasso_cli::error::EXIT_USAGE;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Requested help/version is a success; anything else is a
            // usage error.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = reclasso_cli::execute(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
