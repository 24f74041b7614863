fn main() {
    std::process::exit(mnam::cli::run(std::env::args_os()));
}
