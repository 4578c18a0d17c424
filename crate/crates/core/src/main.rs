fn main() {
    std::process::exit(semisym::cli::main_with(std::env::args_os()));
}
