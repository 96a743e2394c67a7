//! Command-line front-end: configs in, tables and a manifest out.

pub mod config;
pub mod manifest;
pub mod output;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, TaskConfig};
use manifest::{file_entries, sha256_hex, timestamp, Manifest, MANIFEST_NAME};
use output::OutputWriter;
use tasks::{recurrence_table, run_task, stems, Session, Status, TaskReport};

#[derive(Debug, Parser)]
#[command(name = "nelson", version, about = "Truncated Nelson-model wave functions and recurrence tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Stop at the first failed or erroring task.
    #[arg(long, global = true)]
    pub fail_fast: bool,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every task in the config.
    Run { config: PathBuf },
    /// Run only the sweep tasks.
    Sweep { config: PathBuf },
    /// Run only the verify tasks, or a default suite if there are none.
    Verify { config: PathBuf },
    /// Print x_0..x_n of x_n = a x_{n-1} + b x_{n-2} with the closed-form check.
    DemoRecurrence {
        #[arg(long)]
        n: usize,
        /// `a,b`
        #[arg(long, default_value = "1,1", value_parser = parse_scalar)]
        scalar: (i64, i64),
    },
}

fn parse_scalar(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let p = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Config problems exit with 2, failed tasks with 1.
pub fn main_with(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// `Ok(false)` when some task failed.
pub fn execute(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let (path, select): (&Path, fn(&TaskConfig) -> bool) = match &cli.command {
        Command::DemoRecurrence { n, scalar: (a, b) } => {
            if *n > 90 {
                bail!("--n must be at most 90");
            }
            demo(*n, *a, *b)?;
            return Ok(true);
        }
        Command::Run { config } => (config, |_| true),
        Command::Sweep { config } => (config, |t| matches!(t, TaskConfig::Sweep { .. })),
        Command::Verify { config } => (config, |t| matches!(t, TaskConfig::Verify { .. })),
    };
    let (mut cfg, text) = ExperimentConfig::load(path)?;
    cfg.tasks.retain(select);
    if cfg.tasks.is_empty() {
        match cli.command {
            Command::Verify { .. } => cfg.tasks.push(TaskConfig::Verify { vectors: 20, seed: 20, tolerance: 1e-8 }),
            Command::Sweep { .. } => bail!("{} has no sweep tasks", path.display()),
            _ => bail!("{} has no tasks", path.display()),
        }
    }
    let dir = match &cli.out {
        Some(d) => d.clone(),
        None if cfg.output.directory.is_relative() => path.parent().unwrap_or(Path::new(".")).join(&cfg.output.directory),
        None => cfg.output.directory.clone(),
    };
    let command = match cli.command {
        Command::Run { .. } => "run",
        Command::Sweep { .. } => "sweep",
        _ => "verify",
    };
    run_config(&cfg, &text, path, command, &dir, cli.fail_fast)
}

fn demo(n: usize, a: i64, b: i64) -> anyhow::Result<()> {
    let t = recurrence_table("recurrence", n, a, b)?;
    print!("{}", String::from_utf8(t.to_csv()?)?);
    let last = t.rows.last().expect("n + 1 rows");
    println!("x_{n} = {}", last[1]);
    if last[3].is_empty() {
        println!("closed form not expanded above n = {}", tasks::CLOSED_FORM_LIMIT);
    } else {
        println!("monomials = {}", last[3]);
    }
    if t.rows.iter().any(|r| r[4] != "true") {
        bail!("closed form disagrees with the direct recurrence");
    }
    Ok(())
}

/// Runs the tasks in order and writes the manifest last.
pub fn run_config(
    cfg: &ExperimentConfig,
    text: &str,
    path: &Path,
    command: &str,
    dir: &Path,
    fail_fast: bool,
) -> anyhow::Result<bool> {
    let started = SystemTime::now();
    let mut out = OutputWriter::create(dir, &cfg.output.formats)?;
    let session = Session::new(cfg);
    let names = stems(&cfg.tasks);
    let mut reports: Vec<TaskReport> = Vec::new();
    let mut stop = false;
    for (i, (task, stem)) in cfg.tasks.iter().zip(&names).enumerate() {
        if stop {
            reports.push(TaskReport {
                index: i,
                kind: task.name(),
                status: Status::Skipped,
                summary: vec![],
                outputs: vec![],
                error: None,
                seconds: 0.0,
            });
            continue;
        }
        let r = run_task(&session, i, stem, task, &mut out);
        println!("[{}] {} ({:.1} s)", stem, status_word(r.status), r.seconds);
        for line in &r.summary {
            println!("    {line}");
        }
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
        stop = fail_fast && r.status.is_failure();
        reports.push(r);
    }
    let ok = !reports.iter().any(|r| r.status.is_failure());
    let manifest = Manifest {
        tool: "nelson",
        version: env!("CARGO_PKG_VERSION"),
        command: command.into(),
        config_path: path.display().to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        started: timestamp(started),
        finished: timestamp(SystemTime::now()),
        threads: rayon::current_num_threads(),
        status: if ok { "passed" } else { "failed" },
        tasks: reports,
        files: file_entries(out.dir(), out.written())?,
    };
    out.raw(MANIFEST_NAME, &serde_json::to_vec_pretty(&manifest)?)?;
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    Ok(ok)
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Passed => "passed",
        Status::Failed => "FAILED",
        Status::Error => "ERROR",
        Status::Skipped => "skipped",
    }
}
