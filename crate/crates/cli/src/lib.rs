//! File formats, output tables and subcommand implementations behind the
//! `orthoflow` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod matrix_io;
pub mod table;

use std::io::Write;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, Format};
use error::{CliError, Result};
use table::Table;

enum Output {
    Line(String, Value),
    Table(Table),
    Json(Value),
}

fn execute(command: &Command) -> Result<Output> {
    Ok(match command {
        Command::Counts { d, s } => {
            let c = commands::counts(*d, *s)?;
            Output::Line(c.line(), c.to_json())
        }
        Command::Variance(a) => Output::Table(commands::variance(a)?),
        Command::Sortflow(a) => Output::Table(commands::sortflow(a)?),
        Command::Optimize(a) => Output::Table(commands::optimize_trace(a)?),
        Command::Sample(a) => Output::Json(commands::sample(a)?),
    })
}

fn render(output: &Output, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match (output, format) {
        (Output::Line(line, _), Format::Csv) => writeln!(buf, "{line}")?,
        (Output::Table(t), Format::Csv) => t.write_csv(&mut buf)?,
        (Output::Line(_, v) | Output::Json(v), _) => {
            serde_json::to_writer_pretty(&mut buf, v)?;
            buf.push(b'\n');
        }
        (Output::Table(t), Format::Json) => {
            serde_json::to_writer_pretty(&mut buf, &t.to_json())?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Parses `argv`, runs the subcommand and writes its output.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
        _ => CliError::Arg(e.render().to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string()),
    })?;
    let bytes = render(&execute(&cli.command)?, cli.output.format)?;
    match &cli.output.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.clone(), source }),
        None => Ok(std::io::stdout().lock().write_all(&bytes)?),
    }
}
