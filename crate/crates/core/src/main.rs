fn main() {
    std::process::exit(sentipoll::cli::run(std::env::args_os()));
}
