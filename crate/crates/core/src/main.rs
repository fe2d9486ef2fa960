fn main() {
    std::process::exit(krawchain::cli::run(std::env::args()));
}
