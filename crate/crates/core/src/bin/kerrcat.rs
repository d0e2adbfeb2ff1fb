fn main() {
    std::process::exit(kerrcat::cli::run(std::env::args_os()));
}
