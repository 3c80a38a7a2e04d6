fn main() {
    std::process::exit(tbe_sim::cli::main_with_args(std::env::args_os()));
}
