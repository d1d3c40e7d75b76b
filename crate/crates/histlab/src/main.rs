use std::process::exit;

fn main() {
    exit(histlab::cli::main());
}
