fn main() {
    std::process::exit(textnorm::cli::main_with_args(std::env::args_os()));
}
