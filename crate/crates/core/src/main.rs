fn main() {
    std::process::exit(kicklab::cli::run(std::env::args_os()));
}
