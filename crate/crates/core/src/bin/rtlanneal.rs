// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Exit status: 0 success, 2 configuration error,
//! 3 environment or tool error, 4 no feasible design.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rtlanneal::evaluate::{CommandAdapter, MockAdapter, ToolAdapter};
use rtlanneal::harness::config::AdapterKind;
use rtlanneal::harness::report::load_suite_report;
use rtlanneal::harness::run::render_trace_text;
use rtlanneal::harness::{
    load_suite, render_reports, replay_run, run_suite, score_candidate, Baselines, HarnessError,
    RunConfig, RunStatus, SuiteReport,
};

#[derive(Parser)]
#[command(name = "rtlanneal", version, about = "Two-phase annealing over generated RTL")]
struct Cli {
    /// Run configuration file.
    #[arg(long, short, global = true, default_value = "rtlanneal.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every selected benchmark of the suite.
    Run,
    /// Run a single benchmark.
    Bench { id: String },
    /// Re-execute an archived run from its recorded responses.
    Replay {
        archive: PathBuf,
        /// Where the replayed run is written.
        #[arg(long, default_value = "replay")]
        out: PathBuf,
    },
    /// Render the tables of a finished suite.
    Report {
        results_dir: PathBuf,
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
    /// Evaluate one source file against a benchmark.
    Score {
        candidate: PathBuf,
        #[arg(long)]
        spec: String,
        /// Scratch directory for tool outputs.
        #[arg(long, default_value = "score")]
        workdir: PathBuf,
    },
}

fn summarize(report: &SuiteReport, verbose_traces: bool) -> Result<(), HarnessError> {
    if report.benchmarks.is_empty() {
        return Err(HarnessError::Config("no benchmark matched the selection".into()));
    }
    for b in &report.benchmarks {
        if verbose_traces {
            for r in &b.runs {
                println!("--- {} ---", r.run_id);
                let p1 = r.phase1.as_ref().map(|p| p.best_score);
                let p2 = r.phase2.as_ref().map(|p| p.best_ppa.j_ppa());
                print!("{}", render_trace_text(&r.trace, p1, p2));
            }
        }
        let statuses: Vec<&str> = b
            .runs
            .iter()
            .map(|r| match r.status {
                RunStatus::Complete => "complete",
                RunStatus::NoFeasible => "no-feasible",
                RunStatus::Failed => "failed",
            })
            .collect();
        eprintln!("{}: {}", b.id, statuses.join(", "));
    }
    if let Some(r) = report.failed_runs().next() {
        return Err(HarnessError::Run(format!(
            "{} failed: {}",
            r.run_id,
            r.error.as_deref().unwrap_or("unknown error")
        )));
    }
    let infeasible: Vec<&str> = report
        .benchmarks
        .iter()
        .filter(|b| b.ppa.is_none())
        .map(|b| b.id.as_str())
        .collect();
    if !infeasible.is_empty() {
        eprintln!("no feasible design: {}", infeasible.join(", "));
        return Err(HarnessError::NoFeasible);
    }
    Ok(())
}

fn print_tables(report: &SuiteReport, baselines: Option<&Baselines>) {
    let (ppa, corr) = render_reports(report, baselines);
    println!("{ppa}");
    println!("{corr}");
}

fn adapter_for(cfg: &RunConfig) -> Result<Box<dyn ToolAdapter>, HarnessError> {
    Ok(match cfg.adapter.kind {
        AdapterKind::Mock => Box::new(MockAdapter::directives()),
        AdapterKind::Command => Box::new(CommandAdapter::new(cfg.adapter.tool.clone())?),
    })
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let load = |p: &Path| RunConfig::load(p);
    match cli.command {
        Command::Run => {
            let cfg = load(&cli.config)?;
            let report = run_suite(&cfg)?;
            let baselines = cfg.suite.baselines.as_deref().map(Baselines::load).transpose()?;
            print_tables(&report, baselines.as_ref());
            summarize(&report, false)
        }
        Command::Bench { id } => {
            let mut cfg = load(&cli.config)?;
            if !load_suite(&cfg.suite.path)?.iter().any(|s| s.id == id) {
                return Err(HarnessError::Config(format!("unknown benchmark `{id}`")));
            }
            cfg.suite.benchmarks = vec![id];
            let report = run_suite(&cfg)?;
            summarize(&report, true)
        }
        Command::Replay { archive, out } => {
            let r = replay_run(&archive, &out)?;
            println!("{}", r.replay_dir.display());
            match r.first_difference {
                None => {
                    eprintln!("{}: replay identical", r.run_id);
                    Ok(())
                }
                Some(line) => Err(HarnessError::Run(format!(
                    "{}: replayed trace differs from the archive at event {line}",
                    r.run_id
                ))),
            }
        }
        Command::Report { results_dir, baselines } => {
            let report = load_suite_report(&results_dir)?;
            let baselines = baselines.as_deref().map(Baselines::load).transpose()?;
            print_tables(&report, baselines.as_ref());
            Ok(())
        }
        Command::Score { candidate, spec, workdir } => {
            let cfg = load(&cli.config)?;
            let specs = load_suite(&cfg.suite.path)?;
            let spec = specs
                .iter()
                .find(|s| s.id == spec)
                .ok_or_else(|| HarnessError::Config(format!("unknown benchmark `{spec}`")))?;
            let source = std::fs::read_to_string(&candidate)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", candidate.display())))?;
            if workdir.exists() {
                std::fs::remove_dir_all(&workdir).map_err(|e| HarnessError::io(&workdir, e))?;
            }
            let adapter = adapter_for(&cfg)?;
            let score = score_candidate(&cfg, spec, &source, adapter.as_ref(), &workdir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&score).expect("score report serializes")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, HarnessError::NoFeasible) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
