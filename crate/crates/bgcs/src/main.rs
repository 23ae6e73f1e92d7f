use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use bgcs::{exit, run, Cli, RunError};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::PASS,
                _ => exit::ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::from(exit::PASS as u8),
        Ok(false) => ExitCode::from(exit::BREACH as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::ERROR as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, RunError> {
    let report = run(&cli.command, &cli.common)?;
    match &cli.common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write(cli.common.output, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write(cli.common.output, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(report.pass)
}
