fn main() {
    std::process::exit(checkshrink::cli::run_cli(std::env::args_os()));
}
