fn main() {
    std::process::exit(coemap_cli::run());
}
