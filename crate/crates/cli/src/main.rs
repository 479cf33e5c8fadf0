fn main() {
    std::process::exit(ipf_cli::main_with_args(std::env::args_os()));
}
