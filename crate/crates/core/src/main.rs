fn main() {
    std::process::exit(delta_lab::cli::main());
}
