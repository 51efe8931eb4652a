fn main() {
    std::process::exit(lognls_cli::main_with_args(std::env::args_os()));
}
