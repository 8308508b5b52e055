fn main() {
    std::process::exit(multiref_cli::run(std::env::args_os()));
}
