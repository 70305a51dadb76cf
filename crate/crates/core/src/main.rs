fn main() {
    std::process::exit(liouville_step::cli::run(std::env::args_os()));
}
