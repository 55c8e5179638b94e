fn main() {
    std::process::exit(heisenpaley_cli::run(std::env::args_os()));
}
