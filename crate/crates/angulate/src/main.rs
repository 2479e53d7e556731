fn main() {
    std::process::exit(angulate::cli::run());
}
