fn main() {
    std::process::exit(pbphase::cli::run(std::env::args_os()));
}
