fn main() {
    std::process::exit(satrna::cli::main_with_env());
}
