fn main() {
    std::process::exit(cohesim::cli::main());
}
