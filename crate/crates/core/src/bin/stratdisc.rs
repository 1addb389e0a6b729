use std::process::ExitCode;

fn main() -> ExitCode {
    match stratdisc::cli::run(std::env::args_os(), &mut std::io::stdout().lock()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::FAILURE,
        Err(stratdisc::cli::CliError::Args(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
