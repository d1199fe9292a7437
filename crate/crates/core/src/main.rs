fn main() {
    std::process::exit(homc::cli::run(std::env::args_os()));
}
