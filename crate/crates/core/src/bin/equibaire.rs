fn main() {
    std::process::exit(equibaire::cli::main_with_args(std::env::args_os()));
}
