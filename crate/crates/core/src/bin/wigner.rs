fn main() {
    std::process::exit(wigner_core::cli::cli_main(std::env::args_os()));
}
