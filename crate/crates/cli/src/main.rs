fn main() {
    std::process::exit(atlb_cli::run_command(std::env::args_os()));
}
