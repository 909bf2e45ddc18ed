//! `carleson-lab`: command-line runner for the Carleson measure toolkit.

pub mod bundled;
pub mod error;
pub mod ops;
pub mod output;
pub mod registry;
pub mod spec;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{verdict_exit_code, CliError, CliResult, EXIT_PASS, EXIT_USAGE};
use crate::output::{pretty, write, MANIFEST, RESULTS_CSV, RESULTS_JSON, SUMMARY};
use crate::spec::{ExperimentSpec, Format};
use crate::verify::Suite;

/// Caps the worker threads of the integration engine.
pub const THREADS_ENV: &str = "CARLESON_LAB_THREADS";
pub const DEFAULT_OUT: &str = "carleson-out";

#[derive(Debug, Parser)]
#[command(name = "carleson-lab", version, about = "Carleson measure experiments on the unit ball")]
pub struct Cli {
    /// Experiment spec (JSON); defaults to the built-in spec of the subcommand.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output directory [default: carleson-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kobayashi ball geometry, or distance bounds in a general domain.
    Ball,
    /// Berezin transform of a measure along radial probes.
    Berezin,
    /// Functional, Berezin and ratio Carleson tests with a joint verdict.
    CarlesonTest,
    /// Sequence analytics.
    Seq {
        #[command(subcommand)]
        op: SeqCommand,
    },
    /// Covering of K_ε by balls with disjoint r/3 sub-balls.
    Cover,
    /// Eisenman–Kobayashi measure of a ball and the shell bounds.
    Ek,
    /// Runs the operation named in `--spec`.
    Run,
    /// Invariant suite with one row per lemma.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeqCommand {
    /// Separation, counting function and induced Dirac measure.
    Analyze,
    /// First-fit decomposition into r-separated classes.
    Decompose,
    /// Partial sums of the escape series.
    Escape,
    /// Kobayashi shell counts and growth fit.
    Shells,
}

impl Command {
    /// Operation tag a spec must carry for this subcommand.
    fn tag(&self) -> Option<&'static str> {
        Some(match self {
            Command::Ball => "ball",
            Command::Berezin => "berezin",
            Command::CarlesonTest => "carleson-test",
            Command::Seq { op } => match op {
                SeqCommand::Analyze => "seq-analyze",
                SeqCommand::Decompose => "seq-decompose",
                SeqCommand::Escape => "seq-escape",
                SeqCommand::Shells => "seq-shells",
            },
            Command::Cover => "cover",
            Command::Ek => "ek",
            Command::Run | Command::Verify { .. } => return None,
        })
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Verify { suite } => {
            if cli.spec.is_some() || cli.samples.is_some() {
                return Err(CliError::Usage("verify takes only --seed, --out and --format".into()));
            }
            run_verify(*suite, cli.seed.unwrap_or(0), &out_dir(cli, None), cli.format.unwrap_or_default())
        }
        command => run_experiment(cli, command.tag()),
    })
}

fn out_dir(cli: &Cli, spec: Option<&ExperimentSpec>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| spec.and_then(|s| s.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Spec from `--spec` or the subcommand default, with flag overrides applied.
pub fn resolve_spec(cli: &Cli, tag: Option<&str>) -> CliResult<ExperimentSpec> {
    let mut spec = match (&cli.spec, tag) {
        (Some(path), _) => ExperimentSpec::from_file(path)?,
        (None, Some(tag)) => ExperimentSpec::default_for(tag)?,
        (None, None) => return Err(CliError::Usage("run requires --spec <file>".into())),
    };
    if let Some(tag) = tag {
        if spec.operation.tag() != tag {
            return Err(CliError::Usage(format!(
                "spec operation '{}' does not match subcommand '{}'",
                spec.operation.tag(),
                registry::subcommand_for(tag).unwrap_or(tag)
            )));
        }
    }
    if let Some(seed) = cli.seed {
        spec.mc.seed = seed;
    }
    if let Some(samples) = cli.samples {
        spec.mc.n_samples = samples;
    }
    spec.mc.validate()?;
    spec.output.dir = Some(out_dir(cli, Some(&spec)));
    if let Some(f) = cli.format {
        spec.output.format = Some(f);
    }
    Ok(spec)
}

fn run_experiment(cli: &Cli, tag: Option<&str>) -> CliResult<i32> {
    let spec = resolve_spec(cli, tag)?;
    let dir = spec.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let start = Instant::now();
    let outcome = ops::execute(&spec)?;
    let elapsed = start.elapsed();
    log::info!("{} finished in {:.2?}", spec.operation.tag(), elapsed);
    let code = verdict_exit_code(outcome.verdict);
    let format = spec.output.format.unwrap_or_default();
    output::write_artifacts(&dir, &spec, &outcome, format, elapsed, code)?;
    println!("{} [{}]: {}", spec.name, spec.operation.tag(), outcome.verdict);
    for (k, v) in &outcome.summary {
        if v.is_number() || v.is_string() {
            println!("  {k} = {v}");
        }
    }
    println!("artifacts in {}", dir.display());
    Ok(code)
}

fn run_verify(suite: Suite, seed: u64, dir: &Path, format: Format) -> CliResult<i32> {
    let start = Instant::now();
    let rows = verify::run_suite(suite, seed, &verify::bergman_kernel)?;
    let elapsed = start.elapsed();
    let verdict = verify::overall(&rows);
    let code = verdict_exit_code(verdict);
    print!("{}", verify::render(&rows));
    println!("verify {}: {verdict}", suite.as_str());

    std::fs::create_dir_all(dir).map_err(|e| CliError::Output {
        path: dir.display().to_string(),
        source: e,
    })?;
    let table = verify::to_table(&rows);
    let results = match format {
        Format::Csv => write(dir, RESULTS_CSV, &table.to_csv())?,
        Format::Json => write(dir, RESULTS_JSON, &pretty(&table.to_json()))?,
    };
    let summary = json!({
        "suite": suite.as_str(),
        "seed": seed,
        "verdict": verdict,
        "exit_code": code,
        "rows": table.to_json(),
    });
    write(dir, SUMMARY, &pretty(&summary))?;
    let manifest = json!({
        "tool": "carleson-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": format!("verify {}", suite.as_str()),
        "seed": seed,
        "threads": rayon::current_num_threads(),
        "elapsed_seconds": elapsed.as_secs_f64(),
        "verdict": verdict,
        "exit_code": code,
        "artifacts": [
            results.file_name().map_or(Value::Null, |f| Value::from(f.to_string_lossy().into_owned())),
            SUMMARY,
        ],
    });
    write(dir, MANIFEST, &pretty(&manifest))?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn has_path(path: &str) -> bool {
        let mut cmd = Cli::command();
        for part in path.split(' ') {
            match cmd.find_subcommand(part) {
                Some(sub) => cmd = sub.clone(),
                None => return false,
            }
        }
        true
    }

    #[test]
    fn every_operation_has_a_subcommand() {
        for (module, op, path) in registry::REGISTRY {
            assert!(has_path(path), "{module}::{op} maps to missing subcommand '{path}'");
        }
        for tag in registry::OPERATION_TAGS {
            let path = registry::subcommand_for(tag).expect("tag has a subcommand");
            assert!(has_path(path), "tag {tag}");
        }
    }

    #[test]
    fn subcommand_tags_round_trip() {
        let cli = Cli::try_parse_from(["carleson-lab", "seq", "decompose"]).unwrap();
        assert_eq!(cli.command.tag(), Some("seq-decompose"));
        let cli = Cli::try_parse_from(["carleson-lab", "verify", "quick", "--seed", "3"]).unwrap();
        assert_eq!(cli.seed, Some(3));
        assert!(Cli::try_parse_from(["carleson-lab", "verify", "medium"]).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
