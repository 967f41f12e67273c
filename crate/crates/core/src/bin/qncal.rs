fn main() {
    std::process::exit(qncal::cli::run(std::env::args().collect()));
}
