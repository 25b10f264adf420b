fn main() {
    std::process::exit(fusionframes::cli::run(std::env::args()));
}
