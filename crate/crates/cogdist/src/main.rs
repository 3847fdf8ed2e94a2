fn main() {
    std::process::exit(cogdist::cli::run(std::env::args_os()));
}
