use clap::Parser;

use adams_leibniz::cli::{main_with, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADAMS_LEIBNIZ_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = main_with(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
