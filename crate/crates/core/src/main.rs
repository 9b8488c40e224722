fn main() {
    std::process::exit(randns::cli::run_from_args(std::env::args_os()));
}
