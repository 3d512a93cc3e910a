fn main() {
    std::process::exit(simplex_robust::cli::main_entry());
}
