use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use conducta_core::PhaseSet;

use crate::manifest::{manifest_path, RunManifest};
use crate::{Cli, CliError, Command};

mod bmo;
mod bounds;
pub mod corpus;
mod generate;
mod solve;
mod verify;

pub use bmo::bmo_report;
pub use bounds::{bounds_table, sweep_csv};
pub use solve::solve_report;
pub use verify::{verify_corpus, VerifyRow, VERIFY_CSV_HEADER};

pub fn dispatch(command: Command, argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Bounds(a) => bounds::run_bounds(a, argv, stdout),
        Command::Sweep(a) => bounds::run_sweep(a, argv, stdout),
        Command::Solve(a) => solve::run(a, argv, stdout),
        Command::Verify(a) => verify::run(a, argv, stdout, stderr),
        Command::Bmo(a) => bmo::run(a, argv, stdout, stderr),
        Command::Generate(a) => generate::run(a, argv, stderr),
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest)?;
            let argv = m.replay_argv(a.out.as_deref());
            let mut full = vec!["conducta".to_string()];
            full.extend(argv.iter().cloned());
            let cli = Cli::try_parse_from(&full)
                .map_err(|e| CliError::Validation(format!("manifest arguments do not parse: {e}")))?;
            if matches!(cli.command, Command::Replay(_)) {
                return Err(CliError::Validation("a manifest cannot record a replay".into()));
            }
            dispatch(cli.command, &argv, stdout, stderr)
        }
    }
}

pub(crate) fn load_phases(path: &Path, dim: Option<usize>) -> Result<PhaseSet, CliError> {
    let ps = PhaseSet::from_config_file(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    match dim {
        Some(d) => Ok(ps.with_dimension(d)?),
        None => Ok(ps),
    }
}

/// Writes the document to `out` plus its manifest, or to stdout.
pub(crate) fn emit(
    doc: &str,
    out: Option<&Path>,
    mut manifest: RunManifest,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, doc)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
            manifest.output(path);
            manifest.write(&manifest_path(path))
        }
        None => {
            stdout.write_all(doc.as_bytes())?;
            Ok(())
        }
    }
}

pub(crate) fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    builder
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))
}
