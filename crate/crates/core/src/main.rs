fn main() {
    std::process::exit(levy_harmonic::cli::main_entry());
}
