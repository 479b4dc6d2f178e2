fn main() {
    std::process::exit(hdg_cli::run_cli(std::env::args_os()));
}
