fn main() {
    std::process::exit(bmmlab::cli::main_with_args(std::env::args_os()));
}
