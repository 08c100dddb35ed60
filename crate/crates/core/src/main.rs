fn main() {
    std::process::exit(dbqg::cli::cli_main(std::env::args_os()));
}
