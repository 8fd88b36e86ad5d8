fn main() {
    std::process::exit(lambdacool::cli::run(std::env::args_os()));
}
