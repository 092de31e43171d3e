use clap::Parser;
use equiline::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.code);
        }
    }
}
