fn main() {
    std::process::exit(phipractical::cli::run(std::env::args_os()));
}
