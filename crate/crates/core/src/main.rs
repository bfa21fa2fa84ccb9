fn main() {
    std::process::exit(clq::cli::run());
}
