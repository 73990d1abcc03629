fn main() {
    std::process::exit(polymatrix::cli::run(std::env::args_os()));
}
