fn main() {
    std::process::exit(parmc::cli::main_with_args(std::env::args_os()));
}
