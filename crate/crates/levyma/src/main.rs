fn main() {
    std::process::exit(levyma::cli::run(std::env::args_os()));
}
