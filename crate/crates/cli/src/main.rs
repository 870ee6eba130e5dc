fn main() {
    std::process::exit(solvembed_cli::run(std::env::args_os()));
}
