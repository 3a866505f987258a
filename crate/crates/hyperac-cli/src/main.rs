fn main() {
    std::process::exit(hyperac_cli::cli_main(std::env::args_os()));
}
