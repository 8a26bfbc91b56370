use clap::Parser;

fn main() {
    let cli = egomda_cli::Cli::parse();
    if let Err(e) = egomda_cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
