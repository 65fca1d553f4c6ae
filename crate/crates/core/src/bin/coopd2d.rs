use clap::Parser;
use coopd2d::cli::{main_with, Args};

fn main() {
    std::process::exit(main_with(Args::parse()));
}
