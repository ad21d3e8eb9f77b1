fn main() {
    std::process::exit(sigma_minmax::cli::run(std::env::args_os()));
}
