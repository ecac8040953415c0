fn main() {
    std::process::exit(apsquares::cli::run(std::env::args_os()));
}
