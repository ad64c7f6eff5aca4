//! Argument parsing, config layering and output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{self, Context, Outcome};
use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::record::{counts_fingerprint, ExperimentRecord};

#[derive(Debug, Parser)]
#[command(
    name = "superres",
    version,
    about = "Two-frequency superresolution: closed forms, simulation and estimation"
)]
pub struct Cli {
    /// TOML config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in preset, applied below the config file.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write an experiment record (JSON) here.
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(allow_negative_numbers = true)]
    ProbScan(ProbScanArgs),
    #[command(allow_negative_numbers = true)]
    FisherScan(FisherScanArgs),
    #[command(allow_negative_numbers = true)]
    Mle(MleArgs),
    #[command(allow_negative_numbers = true)]
    Multiparam(MultiparamArgs),
    #[command(allow_negative_numbers = true)]
    NoiseSweep(NoiseSweepArgs),
    #[command(allow_negative_numbers = true)]
    Qft(QftArgs),
    #[command(allow_negative_numbers = true)]
    Correlation(CorrelationArgs),
    #[command(allow_negative_numbers = true)]
    Criterion(CriterionArgs),
    /// Experiment records.
    #[command(subcommand)]
    Record(RecordCommand),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Subcommand)]
pub enum RecordCommand {
    /// Re-run a record's config with its seed and compare the counts.
    Replay { path: PathBuf },
}

/// Subcommand names as they appear in records.
fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ProbScan(_) => "prob-scan",
        Command::FisherScan(_) => "fisher-scan",
        Command::Mle(_) => "mle",
        Command::Multiparam(_) => "multiparam",
        Command::NoiseSweep(_) => "noise-sweep",
        Command::Qft(_) => "qft",
        Command::Correlation(_) => "correlation",
        Command::Criterion(_) => "criterion",
        Command::Record(_) => "record",
        Command::Presets => "presets",
    }
}

/// Config contributed by the flags alone.
fn flag_layer(cli: &Cli) -> RunConfig {
    let mut c = RunConfig {
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format,
        threads: cli.threads,
        ..RunConfig::default()
    };
    match &cli.command {
        Command::ProbScan(a) => c.prob_scan = Some(a.clone()),
        Command::FisherScan(a) => c.fisher_scan = Some(a.clone()),
        Command::Mle(a) => c.mle = Some(a.clone()),
        Command::Multiparam(a) => c.multiparam = Some(a.clone()),
        Command::NoiseSweep(a) => c.noise_sweep = Some(a.clone()),
        Command::Qft(a) => c.qft = Some(a.clone()),
        Command::Correlation(a) => c.correlation = Some(a.clone()),
        Command::Criterion(a) => c.criterion = Some(a.clone()),
        Command::Record(_) | Command::Presets => {}
    }
    c
}

/// Preset, then config file, then flags.
pub fn layered_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut c = match &cli.preset {
        Some(p) => preset(p)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &cli.config {
        c = c.merge(RunConfig::load(path)?);
    }
    Ok(c.merge(flag_layer(cli)))
}

/// Keeps only the section of `command` so records hold what actually ran.
fn only_section(c: RunConfig, command: &str) -> RunConfig {
    let mut out = RunConfig {
        seed: c.seed,
        out: c.out,
        format: c.format,
        threads: c.threads,
        ..RunConfig::default()
    };
    match command {
        "prob-scan" => out.prob_scan = Some(c.prob_scan.unwrap_or_default()),
        "fisher-scan" => out.fisher_scan = Some(c.fisher_scan.unwrap_or_default()),
        "mle" => out.mle = Some(c.mle.unwrap_or_default()),
        "multiparam" => out.multiparam = Some(c.multiparam.unwrap_or_default()),
        "noise-sweep" => out.noise_sweep = Some(c.noise_sweep.unwrap_or_default()),
        "qft" => out.qft = Some(c.qft.unwrap_or_default()),
        "correlation" => out.correlation = Some(c.correlation.unwrap_or_default()),
        "criterion" => out.criterion = Some(c.criterion.unwrap_or_default()),
        _ => {}
    }
    out
}

/// Runs `command` on an already layered config.
pub fn execute(command: &str, cfg: &RunConfig) -> CliResult<Outcome> {
    let ctx = Context { seed: cfg.seed };
    let threads = cfg.threads.unwrap_or(0);
    crate::parallel::with_pool(threads, || match command {
        "prob-scan" => commands::prob_scan(cfg.prob_scan.as_ref().unwrap_or(&Default::default()), &ctx),
        "fisher-scan" => commands::fisher_scan(cfg.fisher_scan.as_ref().unwrap_or(&Default::default())),
        "mle" => commands::mle(cfg.mle.as_ref().unwrap_or(&Default::default()), &ctx),
        "multiparam" => commands::multiparam(cfg.multiparam.as_ref().unwrap_or(&Default::default()), &ctx),
        "noise-sweep" => commands::noise_sweep(cfg.noise_sweep.as_ref().unwrap_or(&Default::default()), &ctx),
        "qft" => commands::qft(cfg.qft.as_ref().unwrap_or(&Default::default()), &ctx),
        "correlation" => commands::correlation(cfg.correlation.as_ref().unwrap_or(&Default::default()), &ctx),
        "criterion" => commands::criterion(cfg.criterion.as_ref().unwrap_or(&Default::default())),
        other => Err(CliError::config(format!("command: unknown subcommand {other:?}"))),
    })?
}

/// Serialized artifact in the requested format.
pub fn render(outcome: &Outcome, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => outcome.table.to_csv_string(),
        Format::Json => {
            let v = json!({ "summary": outcome.summary, "table": outcome.table.to_json() });
            serde_json::to_string_pretty(&v)
                .map(|s| s + "\n")
                .map_err(|e| CliError::Numerical(e.to_string()))
        }
    }
}

fn write_artifact(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn replay(path: &Path, threads: Option<usize>) -> CliResult<String> {
    let rec = ExperimentRecord::load(path)?;
    let mut cfg = rec.config.clone();
    cfg.seed = Some(rec.master_seed);
    if threads.is_some() {
        cfg.threads = threads;
    }
    let outcome = execute(&rec.command, &cfg)?;
    let want = counts_fingerprint(&rec.counts)?;
    let got = counts_fingerprint(&outcome.counts)?;
    if want != got {
        return Err(CliError::Numerical(format!(
            "replay of {} does not reproduce its counts ({} recorded, {} replayed)",
            path.display(),
            rec.counts.len(),
            outcome.counts.len()
        )));
    }
    Ok(format!("replay ok: {} counts reproduced\n", rec.counts.len()))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Presets => {
            return write_artifact(None, &(PRESETS.join("\n") + "\n"));
        }
        Command::Record(RecordCommand::Replay { path }) => {
            let msg = replay(path, cli.threads)?;
            return write_artifact(cli.out.as_ref(), &msg);
        }
        _ => {}
    }
    let name = command_name(&cli.command);
    let cfg = only_section(layered_config(&cli)?, name);
    let start = Instant::now();
    let outcome = execute(name, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let text = render(&outcome, cfg.format.unwrap_or_default())?;
    write_artifact(cfg.out.as_ref(), &text)?;
    if let Some(path) = &cli.record {
        let seed = cfg
            .seed
            .ok_or_else(|| CliError::config("record: deterministic commands have nothing to record without --seed"))?;
        ExperimentRecord::new(name, seed, cfg, elapsed, outcome.counts).save(path)?;
    }
    Ok(())
}

/// Full CLI run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("superres: {e}");
            e.exit_code()
        }
    }
}
