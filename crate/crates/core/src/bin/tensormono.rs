fn main() {
    let code = tensor_monopole::cli::run_from_args(std::env::args().collect());
    std::process::exit(code);
}
