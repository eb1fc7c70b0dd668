mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Violation;

const EXIT_VIOLATION: u8 = 1;
const EXIT_SINGULAR: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_COLLISION: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Violation>().is_some() {
        return EXIT_VIOLATION;
    }
    match err.downcast_ref::<polyring::Error>() {
        Some(polyring::Error::NumericallySingular { .. }) => EXIT_SINGULAR,
        Some(polyring::Error::Collision { .. }) => EXIT_COLLISION,
        Some(_) => EXIT_INVALID,
        // I/O and malformed documents
        None => EXIT_INVALID,
    }
}

/// A reader closing stdout early (`| head`) is not a failure.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("POLYRING_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        polyring::Error::InvalidArgument(format!(
            "POLYRING_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    log::debug!("scan parallelism capped at {threads} threads");
    Ok(())
}

fn dispatch(command: &Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Solve(a) => commands::solve(a, out),
        Command::Scan(kind) => commands::scan(kind, out),
        Command::Certify(a) => commands::certify(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Spectrum(a) => commands::spectrum(a, out),
        Command::Run(run) => {
            let text = std::fs::read_to_string(&run.config)?;
            let inner: Command = serde_json::from_str(&text).map_err(|e| {
                polyring::Error::InvalidArgument(format!("{}: {e}", run.config.display()))
            })?;
            if matches!(inner, Command::Run(_)) {
                return Err(polyring::Error::InvalidArgument("nested run documents".into()).into());
            }
            dispatch(&inner, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID),
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = configure_threads().and_then(|()| dispatch(&cli.command, &mut out));
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("polyring: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
