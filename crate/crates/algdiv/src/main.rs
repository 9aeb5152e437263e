fn main() {
    std::process::exit(algdiv::cli::run(std::env::args_os()));
}
