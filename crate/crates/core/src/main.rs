fn main() {
    std::process::exit(ellwk::cli::run(std::env::args_os()));
}
