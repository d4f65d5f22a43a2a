use clap::Parser;

use zdebias::cli::{exit_code, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let Err(err) = run(cli, args) {
        log::error!("{err}");
        std::process::exit(exit_code(&err));
    }
}
