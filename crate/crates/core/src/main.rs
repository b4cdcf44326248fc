use clap::Parser;
use jc_lattice::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
