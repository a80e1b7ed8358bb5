//! Command-line front end: fixture generation, solving, evaluation,
//! rendering and manifest replay.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod render;
pub mod spheres;

use std::path::PathBuf;

use lsmat::parallel::with_threads;

use args::{Cli, Command, ReplayArgs};
use commands::{execute, Request};
use error::CliError;
use manifest::{FileDigest, RunManifest};

/// Runs a parsed command line and returns what should go to stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let threads = cli.threads;
    let (request, manifest_path) = match cli.command {
        Command::Replay(a) => return replay(&a, threads),
        Command::Generate(a) => (Request::Generate(commands::generate_request(&a)?), a.manifest),
        Command::Solve(a) => (Request::Solve(commands::solve_request(&a)?), a.manifest),
        Command::Eval(a) => (commands::eval_request(&a)?, a.manifest),
        Command::Render(a) => (Request::Render(commands::render_request(&a)?), a.manifest),
    };
    let inputs = request
        .inputs()
        .into_iter()
        .map(FileDigest::of)
        .collect::<Result<Vec<_>, _>>()?;
    let outcome = with_threads(threads.map(|t| t as usize), || execute(&request))?;
    let outputs = request.outputs();
    let manifest_path = manifest_path.or_else(|| outputs.first().map(|p| manifest::default_path(p)));
    if let Some(path) = manifest_path {
        let manifest = RunManifest {
            schema: manifest::SCHEMA.into(),
            command: request.name().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            threads,
            inputs,
            outputs: outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_, _>>()?,
            timings_ms: outcome.timings_ms,
            iterations: outcome.iterations,
            request,
        };
        manifest.save(&path)?;
    }
    match outcome.failure {
        Some(msg) => Err(CliError::Solver(msg)),
        None => Ok(outcome.stdout),
    }
}

fn replay(a: &ReplayArgs, threads: Option<u32>) -> Result<String, CliError> {
    let manifest = RunManifest::load(&a.manifest)?;
    for input in &manifest.inputs {
        let now = FileDigest::of(&input.path)?;
        if now.sha256 != input.sha256 {
            return Err(CliError::BadInput(format!(
                "input {} changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let mut request = manifest.request.clone();
    if let Some(dir) = &a.out_dir {
        for out in request.outputs_mut() {
            let name = out.file_name().map(PathBuf::from).unwrap_or_default();
            *out = dir.join(name);
        }
    }
    let outcome = with_threads(threads.or(manifest.threads).map(|t| t as usize), || execute(&request))?;
    let produced = request.outputs();
    if produced.len() != manifest.outputs.len() {
        return Err(CliError::Mismatch("output count differs from the manifest".into()));
    }
    for (path, recorded) in produced.iter().zip(&manifest.outputs) {
        if FileDigest::of(path)?.sha256 != recorded.sha256 {
            return Err(CliError::Mismatch(format!(
                "{} differs from recorded {}",
                path.display(),
                recorded.path.display()
            )));
        }
    }
    if let Some(msg) = outcome.failure {
        return Err(CliError::Solver(msg));
    }
    Ok(format!(
        "replayed {}: {} output(s) identical\n",
        manifest.command,
        produced.len()
    ))
}
