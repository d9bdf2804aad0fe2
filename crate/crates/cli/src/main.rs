mod config;
mod output;
mod run;

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Common, RunConfig};
use run::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are successful runs
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    set_jobs(&common)?;
    let cfg = match cli.group {
        config::Group::Replay { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?
        }
        group => RunConfig::new(group.into_operation().expect("leaf command"), &common),
    };
    if common.print_config {
        let mut text = serde_json::to_string_pretty(&cfg).expect("config serializes");
        text.push('\n');
        return emit(text.as_bytes(), None, common.force);
    }
    let report = run::execute(&cfg)?;
    let format = cfg.format.unwrap_or_else(|| report.natural_format());
    let bytes = report.render(format).map_err(CliError::Usage)?;
    emit(&bytes, cfg.output_path.as_deref().map(Path::new), common.force)
}

fn set_jobs(common: &Common) -> Result<(), CliError> {
    let Some(jobs) = common.jobs else {
        return Ok(());
    };
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

fn emit(bytes: &[u8], path: Option<&Path>, force: bool) -> Result<(), CliError> {
    let io = |e: std::io::Error, what: &str| CliError::Usage(format!("{what}: {e}"));
    match path {
        None => std::io::stdout().write_all(bytes).map_err(|e| io(e, "stdout")),
        Some(p) => {
            let mut opts = OpenOptions::new();
            opts.write(true);
            if force {
                opts.create(true).truncate(true);
            } else {
                opts.create_new(true);
            }
            let name = p.display().to_string();
            let mut file = opts.open(p).map_err(|e| {
                if e.kind() == std::io::ErrorKind::AlreadyExists {
                    CliError::Usage(format!("{name} exists; pass --force to overwrite"))
                } else {
                    io(e, &name)
                }
            })?;
            file.write_all(bytes).map_err(|e| io(e, &name))
        }
    }
}
