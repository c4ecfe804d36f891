fn main() {
    std::process::exit(qjsd::cli::run(std::env::args_os()));
}
