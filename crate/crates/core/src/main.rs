fn main() {
    std::process::exit(manyrow::cli::main());
}
