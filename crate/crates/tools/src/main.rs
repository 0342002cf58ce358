fn main() {
    std::process::exit(tcn_tools::cli::main_with_args(std::env::args_os()));
}
