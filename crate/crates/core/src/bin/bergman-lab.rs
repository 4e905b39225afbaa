fn main() {
    std::process::exit(bergman_extremal::lab::run_cli(std::env::args_os()));
}
