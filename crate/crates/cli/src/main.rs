fn main() {
    std::process::exit(infsup_cli::run(std::env::args_os()));
}
