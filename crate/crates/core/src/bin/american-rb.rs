fn main() {
    std::process::exit(american_rb::cli::run());
}
