fn main() {
    std::process::exit(smj::cli::run(std::env::args_os()));
}
