use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bioeco_cli::{emit, parse_with_overrides, run, CliError, Command, Format};
use clap::Parser;

/// Predator-prey fishery analyses with a refuge-dependent functional response.
#[derive(Debug, Parser)]
#[command(name = "bioeco", version)]
struct Args {
    command: Command,

    /// TOML configuration file (optional for `check`).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set m=0.02` or `--set sim.t_end=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BIOECO_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Parse(format!(
            "BIOECO_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    log::debug!("built without the parallel feature; ignoring {threads} threads");
    Ok(())
}

fn execute(args: &Args) -> Result<bool, CliError> {
    init_threads()?;
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?,
        None if args.command == Command::Check => String::new(),
        None => {
            return Err(CliError::Parse(
                "--config is required for this command".into(),
            ))
        }
    };
    let config = parse_with_overrides(&text, &args.set)?;
    let envelope = run(&config, Some(args.command))?;
    for note in &envelope.diagnostics {
        log::warn!("{note}");
    }

    let format = args.format.or(config.output.format).unwrap_or(Format::Csv);
    let body = emit(&envelope, format);
    let out = args
        .out
        .clone()
        .or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(envelope.ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
