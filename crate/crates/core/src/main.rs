fn main() {
    std::process::exit(hsym_core::cli::main_with_args(std::env::args_os()));
}
