fn main() {
    std::process::exit(rmcap::cli::main_with_args(std::env::args_os()));
}
