fn main() {
    std::process::exit(quantmerge::cli::run_cli(std::env::args_os()));
}
