fn main() {
    std::process::exit(nevpick::cli::run(std::env::args_os()));
}
