use clap::Parser;
use duotax::cli::{run, Cli};

fn main() {
    let echo = std::env::args().collect::<Vec<_>>().join(" ");
    let cli = Cli::parse();
    if let Err(e) = run(cli, &echo) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
