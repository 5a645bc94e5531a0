fn main() {
    std::process::exit(cusplab::cli::run_from(std::env::args_os()));
}
