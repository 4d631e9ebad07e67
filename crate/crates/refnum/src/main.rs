use clap::Parser;

mod cli;

fn main() {
    let cli = cli::Cli::parse();
    if let Err(failure) = cli::run(cli) {
        eprintln!("refnum: {}", failure.message);
        std::process::exit(failure.code);
    }
}
