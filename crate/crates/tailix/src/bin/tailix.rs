fn main() {
    std::process::exit(tailix::cli::run());
}
