fn main() {
    std::process::exit(capbem::cli::main());
}
