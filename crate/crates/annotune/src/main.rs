fn main() {
    std::process::exit(annotune::cli::main_with_args(std::env::args_os()));
}
