fn main() {
    std::process::exit(bf2::cli::run(std::env::args_os()));
}
