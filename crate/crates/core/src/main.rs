fn main() {
    std::process::exit(sphvac::cli::cli_main(std::env::args_os()));
}
