fn main() {
    std::process::exit(vortex_cli::run_cli(std::env::args_os()));
}
