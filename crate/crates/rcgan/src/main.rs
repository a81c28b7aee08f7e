fn main() {
    std::process::exit(rcgan::cli::run(std::env::args_os()));
}
