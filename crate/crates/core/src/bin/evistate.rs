fn main() {
    std::process::exit(evistate::cli::run());
}
