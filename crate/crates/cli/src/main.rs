fn main() {
    std::process::exit(chamnet::run(std::env::args().collect()));
}
