fn main() {
    std::process::exit(sgrg::run(std::env::args()));
}
