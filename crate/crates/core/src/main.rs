fn main() {
    std::process::exit(strong_weights::cli::run(std::env::args_os()));
}
