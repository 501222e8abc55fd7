fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("RND_LOG")).init();
    std::process::exit(rnd_core::cli::main_with_args(std::env::args_os()));
}
