fn main() {
    std::process::exit(karspace::cli::main_with_args(std::env::args_os()));
}
