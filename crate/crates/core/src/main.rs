use clap::Parser;

use hbtms::cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("HBTMS_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
