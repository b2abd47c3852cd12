// SPDX-License-Identifier: Apache-2.0

//! Runs the shipped suite offline from recorded responses and prints both
//! tables. Pass benchmark ids to restrict the selection.

use std::path::Path;

use rtlanneal::harness::{render_reports, run_suite, Baselines, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let mut cfg = RunConfig::load(&root.join("rtlanneal.toml"))?;
    // Paths in the config are relative to the crate root.
    cfg.suite.path = root.join(&cfg.suite.path);
    cfg.suite.templates = cfg.suite.templates.map(|p| root.join(p));
    cfg.suite.baselines = cfg.suite.baselines.map(|p| root.join(p));
    cfg.backend.replay_dir = root.join(&cfg.backend.replay_dir);
    let out = tempfile::tempdir()?;
    cfg.suite.output_dir = out.path().to_path_buf();
    cfg.suite.benchmarks = std::env::args().skip(1).collect();

    let report = run_suite(&cfg)?;
    let baselines = match &cfg.suite.baselines {
        Some(p) => Some(Baselines::load(p)?),
        None => None,
    };
    let (ppa, corr) = render_reports(&report, baselines.as_ref());
    println!("{ppa}\n{corr}");
    for b in &report.benchmarks {
        for r in &b.runs {
            println!("{} {:?} trace events={}", r.run_id, r.status, r.trace.len());
        }
    }
    Ok(())
}
