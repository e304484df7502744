fn main() {
    std::process::exit(copreg::cli::run(std::env::args_os()));
}
