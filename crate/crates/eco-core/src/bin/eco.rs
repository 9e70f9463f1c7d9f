use clap::Parser;

fn main() {
    let cli = eco_core::cli::Cli::parse();
    if let Err(e) = eco_core::cli::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
