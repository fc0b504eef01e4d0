fn main() {
    std::process::exit(ntlkit::cli::main_with_args(std::env::args_os()));
}
