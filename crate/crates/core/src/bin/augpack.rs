fn main() {
    std::process::exit(augpack::harness::cli::run(std::env::args_os()));
}
