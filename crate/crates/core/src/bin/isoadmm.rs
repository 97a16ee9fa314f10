fn main() {
    std::process::exit(isoadmm::cli::run(std::env::args_os()));
}
