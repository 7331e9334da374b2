fn main() {
    std::process::exit(lcorr::cli::run());
}
