fn main() {
    std::process::exit(graphtv_cli::run(std::env::args_os()));
}
