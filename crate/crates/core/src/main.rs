fn main() {
    std::process::exit(cubicvar::cli::run(std::env::args_os()));
}
