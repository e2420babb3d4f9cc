use clap::Parser;
use neorl_cli::{execute, Cli, EXIT_OK, EXIT_USAGE};
use std::process::exit;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            exit(code);
        }
    };
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = execute(&cli, &mut stdout) {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}
