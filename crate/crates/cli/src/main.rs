fn main() {
    std::process::exit(curvemetrics_cli::run(std::env::args_os()));
}
