use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = papsmix::cli::Cli::parse();
    if let Err(e) = papsmix::commands::run(cli) {
        let message = e.to_string().replace('\n', " ");
        eprintln!("papsmix: {message}");
        std::process::exit(e.exit_code());
    }
}
