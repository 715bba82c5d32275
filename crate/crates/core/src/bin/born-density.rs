fn main() {
    std::process::exit(born_density::cli::main_with_args(std::env::args_os()));
}
