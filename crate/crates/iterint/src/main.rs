fn main() {
    std::process::exit(iterint::cli::run(std::env::args_os()));
}
