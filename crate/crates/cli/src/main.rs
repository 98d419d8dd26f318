fn main() {
    std::process::exit(pbil_cli::cli::run());
}
