fn main() {
    std::process::exit(fiberpoles::cli::run(std::env::args_os()));
}
