fn main() {
    std::process::exit(herding_tax::cli::run());
}
