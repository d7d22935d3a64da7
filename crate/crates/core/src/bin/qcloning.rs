fn main() {
    std::process::exit(qcloning::cli::main());
}
