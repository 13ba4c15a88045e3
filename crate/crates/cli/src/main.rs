fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(cavdyn_cli::LOG_ENV, "warn")).init();
    std::process::exit(cavdyn_cli::run(std::env::args_os()));
}
