fn main() {
    std::process::exit(apgabor_cli::cli_main(std::env::args_os()));
}
