use std::process::ExitCode;

use ssa_koopman::cli::{run, CliError};

fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = err.exit_code();
            match err {
                CliError::Usage(e) => {
                    let _ = e.print();
                }
                CliError::Run(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code as u8)
        }
    }
}
