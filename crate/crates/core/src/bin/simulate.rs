use clap::Parser;

fn main() {
    let args = vibmirror::cli::Args::parse();
    std::process::exit(vibmirror::cli::main_with(args));
}
