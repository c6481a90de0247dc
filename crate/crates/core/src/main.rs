fn main() {
    std::process::exit(ddcv::cli::main());
}
