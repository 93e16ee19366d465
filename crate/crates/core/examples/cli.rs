//! Drives the command-line interface in process.
//!
//! cargo run --example cli -- verify --domain builtin:hexagon --levels 3 --kmax 4

fn main() {
    let mut argv: Vec<String> = std::env::args().collect();
    if argv.len() == 1 {
        argv.extend(
            [
                "reference",
                "--domain",
                "builtin:disk",
                "--count",
                "6",
                "--no-timestamp",
            ]
            .map(String::from),
        );
    }
    std::process::exit(dn_spectra::cli::run(argv));
}
