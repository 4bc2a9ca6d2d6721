fn main() {
    std::process::exit(sorc_cli::cli_main(std::env::args()));
}
