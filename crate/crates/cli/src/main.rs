use clap::Parser;

fn main() {
    let cli = gainsense_cli::Cli::parse();
    std::process::exit(gainsense_cli::run(&cli));
}
