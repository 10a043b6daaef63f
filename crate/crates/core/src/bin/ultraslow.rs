fn main() {
    std::process::exit(ultraslow::cli::run(std::env::args_os()));
}
