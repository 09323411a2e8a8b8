use clap::Parser;
use dasmr_cli::Cli;

fn main() {
    let cli = Cli::parse();
    match dasmr_cli::run(cli) {
        Ok(status) => std::process::exit(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
