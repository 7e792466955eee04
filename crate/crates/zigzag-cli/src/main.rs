fn main() {
    let code = zigzag_cli::run(std::env::args_os());
    std::process::exit(code);
}
