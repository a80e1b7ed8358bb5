use clap::Parser;
use lsmat_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    match lsmat_cli::run(cli) {
        Ok(out) => print!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
