fn main() {
    std::process::exit(obsreg::cli::run_cli(std::env::args_os()));
}
