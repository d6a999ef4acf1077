fn main() {
    std::process::exit(bahadur::cli::run_from(std::env::args_os()));
}
