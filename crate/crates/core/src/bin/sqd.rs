fn main() {
    std::process::exit(sqdsolve::cli::run(std::env::args_os()));
}
