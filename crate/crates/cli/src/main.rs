fn main() {
    std::process::exit(tps_cli::run(std::env::args_os()));
}
