use clap::Parser;

use rectvis_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("rectvis: {e}");
        std::process::exit(e.exit_code());
    }
}
