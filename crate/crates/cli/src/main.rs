fn main() {
    std::process::exit(cobeam_cli::run(std::env::args_os()));
}
