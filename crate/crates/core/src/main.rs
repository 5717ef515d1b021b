fn main() {
    std::process::exit(qrabi::cli::main_with_args(std::env::args_os()));
}
