fn main() {
    std::process::exit(vagueness_cli::run(std::env::args_os()));
}
