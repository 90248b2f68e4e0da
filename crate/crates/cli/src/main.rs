fn main() {
    std::process::exit(hetmo_cli::main_with_args(std::env::args_os()));
}
