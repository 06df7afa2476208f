fn main() {
    std::process::exit(lnp::cli::main());
}
