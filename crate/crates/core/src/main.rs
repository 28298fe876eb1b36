fn main() {
    std::process::exit(qhess::cli::main());
}
