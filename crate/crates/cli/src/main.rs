use clap::Parser;

fn main() {
    let cli = reltime_cli::Cli::parse();
    std::process::exit(reltime_cli::run(cli));
}
