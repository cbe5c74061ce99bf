fn main() {
    std::process::exit(interlace_cli::run(std::env::args().collect()));
}
