fn main() {
    std::process::exit(sublinear_matching::cli::run_from(std::env::args_os()));
}
