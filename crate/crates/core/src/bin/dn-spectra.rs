fn main() {
    std::process::exit(dn_spectra::cli::run(std::env::args_os()));
}
