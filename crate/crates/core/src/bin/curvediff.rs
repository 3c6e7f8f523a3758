fn main() {
    std::process::exit(curvediff::cli::run_from(std::env::args_os()));
}
