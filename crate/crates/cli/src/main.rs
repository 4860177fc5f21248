mod args;
mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use mtss::{Error, MixtureParams};
use serde_json::json;

use args::{Cli, Command, DEFAULT_COMPONENTS};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or parameters (exit code 2).
    Usage(String),
    Library(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) => match e {
                Error::InvalidParameter { .. }
                | Error::WeightsNotNormalized { .. }
                | Error::EmptyMixture
                | Error::RegimeMismatch { .. }
                | Error::InvalidGrid(_)
                | Error::TemperingTooStrong { .. } => 2,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Library(e) => e.to_string(),
            CliError::Io(e) => format!("i/o error: {e}"),
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::Pdf(_) => "pdf",
        Command::Levy(_) => "levy",
        Command::Moments(_) => "moments",
        Command::Renewal(_) => "renewal",
        Command::Poisson(_) => "poisson",
        Command::Verify(_) => "verify",
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("invalid `--threads`: {e}")))?;
    }
    let triples = if cli.global.comp.is_empty() {
        DEFAULT_COMPONENTS.to_vec()
    } else {
        cli.global.comp.clone()
    };
    let params = MixtureParams::from_triples(&triples)?;
    let run = commands::run(&cli.command, &cli.global, &params)?;
    match &cli.global.out {
        Some(dir) => {
            let echo = json!({ "components": &params, "arguments": cli });
            output::write_dir(
                dir,
                &run.artifacts,
                command_name(&cli.command),
                &echo,
                cli.global.seed,
                start.elapsed(),
            )
            .map_err(CliError::Io)?;
        }
        None => output::write_stdout(&run.artifacts).map_err(CliError::Io)?,
    }
    Ok(run.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => e.exit(),
            _ => {
                let rendered = e.render().to_string();
                eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
                return ExitCode::from(2);
            }
        },
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
