fn main() {
    std::process::exit(descore_cli::run_cli(std::env::args_os()));
}
