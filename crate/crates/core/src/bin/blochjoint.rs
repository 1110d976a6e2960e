fn main() {
    std::process::exit(blochjoint::cli::run(std::env::args_os()));
}
