use clap::Parser;
use gatesep_cli::{run, Cli};

fn main() {
    if let Ok(value) = std::env::var("GATESEP_MAX_DIM") {
        match value.parse::<usize>() {
            Ok(dim) if dim >= 1 => gatesep_core::set_max_dim(dim),
            _ => {
                eprintln!("error: GATESEP_MAX_DIM must be a positive integer, got {value:?}");
                std::process::exit(gatesep_cli::EXIT_ERROR);
            }
        }
    }
    let cli = Cli::parse();
    let mut out = String::new();
    let mut err = String::new();
    let code = run(cli, &mut out, &mut err);
    print!("{out}");
    eprint!("{err}");
    std::process::exit(code);
}
