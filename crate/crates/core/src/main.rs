fn main() {
    std::process::exit(partcache::cli::run(std::env::args_os()));
}
