fn main() {
    std::process::exit(cutproject::cli::main_with_args(std::env::args_os()));
}
