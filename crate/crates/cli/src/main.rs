fn main() {
    std::process::exit(dhsparse_cli::run_cli(std::env::args_os()));
}
