fn main() {
    std::process::exit(pdds_cli::run(std::env::args_os()));
}
