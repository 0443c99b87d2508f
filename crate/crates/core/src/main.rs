fn main() {
    std::process::exit(lp_bellman::cli::run());
}
