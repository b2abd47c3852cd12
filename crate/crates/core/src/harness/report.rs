// SPDX-License-Identifier: Apache-2.0

//! Plain-text PPA and correctness tables.
//!
//! Baseline numbers are printed as stored, never recomputed. Our own figures
//! print area and power with one or two decimals and slack signed with two.

use std::fmt::Write as _;
use std::path::Path;

use super::run::SuiteReport;
use super::suite::{BaselinePpa, Baselines};
use super::{write_file, HarnessError};
use crate::objectives::relative_gain;

const DASH: &str = "--";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| DASH.to_string(), |x| format!("{x}"))
}

/// Two decimals with one trailing zero dropped: `59.9`, `322.0`, `7.05`.
fn qty(v: f64) -> String {
    let s = format!("{v:.2}");
    match s.strip_suffix('0') {
        Some(t) => t.to_string(),
        None => s,
    }
}

/// Integer when integral, else one decimal.
fn pct(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.1}")
    }
}

fn signed_pct(v: f64) -> String {
    let s = pct(v.abs());
    if v < 0.0 && s != "0" {
        format!("-{s}")
    } else {
        format!("+{s}")
    }
}

fn row(cells: &[String], widths: &[usize]) -> String {
    let mut line = String::new();
    for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
        if i > 0 {
            line.push_str(" | ");
        }
        let _ = write!(line, "{c:<w$}");
    }
    line.trim_end().to_string()
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = row(header, &widths);
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    out.push('\n');
    for r in rows {
        out.push_str(&row(r, &widths));
        out.push('\n');
    }
    out
}

fn warn_unmatched(report: &SuiteReport, baselines: &Baselines) {
    for id in baselines.benchmark.keys() {
        if !report.benchmarks.iter().any(|b| &b.id == id) {
            log::warn!("baseline entry `{id}` matches no benchmark in the report");
        }
    }
    for b in &report.benchmarks {
        if !baselines.benchmark.contains_key(&b.id) {
            log::warn!("benchmark `{}` has no baseline entry", b.id);
        }
    }
}

/// Renders `(ppa_table, correctness_table)`.
pub fn render_reports(report: &SuiteReport, baselines: Option<&Baselines>) -> (String, String) {
    if let Some(b) = baselines {
        warn_unmatched(report, b);
    }
    let flows: &[String] = baselines.map_or(&[], |b| &b.ppa_flows);

    let mut header = vec!["Design".to_string()];
    for f in flows {
        header.extend([format!("{f} Area"), "Power".into(), "Timing".into()]);
    }
    header.extend(["Area".into(), "Power".into(), "Timing".into()]);
    let mut rows = Vec::new();
    for b in &report.benchmarks {
        let mut r = vec![b.id.clone()];
        let entry = baselines.and_then(|x| x.benchmark.get(&b.id));
        for f in flows {
            let p: BaselinePpa = entry.and_then(|e| e.ppa.get(f)).copied().unwrap_or_default();
            r.extend([opt(p.area_um2), opt(p.power_uw), opt(p.wns_ns)]);
        }
        match &b.ppa {
            Some(p) => r.extend([
                qty(p.area_um2),
                qty(p.power_uw),
                format!("{:+.2}", p.wns_ns),
            ]),
            None => r.extend([DASH.into(), DASH.into(), DASH.into()]),
        }
        rows.push(r);
    }
    let ppa = table(&header, &rows);

    let header: Vec<String> = [
        "Design", "Base Syntax", "Base Struct", "Base Logic", "Syntax", "Struct", "Logic",
        "Delta", "Gain %", "Depth",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    for b in &report.benchmarks {
        let base = baselines
            .and_then(|x| x.benchmark.get(&b.id))
            .and_then(|e| e.correctness);
        let mut r = vec![b.id.clone()];
        match base {
            Some(c) => r.extend([opt(Some(c.syntax_pct)), opt(Some(c.struct_pct)), opt(Some(c.logic_pct))]),
            None => r.extend([DASH.into(), DASH.into(), DASH.into()]),
        }
        match &b.correctness {
            Some(m) => {
                r.extend([pct(m.s_syntax), pct(m.s_struct), pct(m.s_logic)]);
                let (delta, gain) = match base {
                    Some(c) => (
                        Some(m.s_struct - c.struct_pct),
                        relative_gain(m.s_struct, c.struct_pct).ok(),
                    ),
                    None if baselines.is_none() => (m.delta_struct, m.g_rel),
                    None => (None, None),
                };
                r.push(delta.map_or_else(|| DASH.into(), signed_pct));
                r.push(gain.map_or_else(|| DASH.into(), |g| format!("{g:+.1}")));
                r.push(m.depth_band.map_or_else(|| DASH.into(), |d| d.to_string()));
            }
            None => r.extend(std::iter::repeat_n(DASH.to_string(), 6)),
        }
        rows.push(r);
    }
    (ppa, table(&header, &rows))
}

/// Writes `suite_report.json`, `ppa_table.txt`, and `correctness_table.txt`.
pub fn write_suite_outputs(dir: &Path, report: &SuiteReport, baselines: Option<&Baselines>) -> Result<(), HarnessError> {
    let (ppa, corr) = render_reports(report, baselines);
    write_file(&dir.join("suite_report.json"), &report.to_json())?;
    write_file(&dir.join("ppa_table.txt"), &ppa)?;
    write_file(&dir.join("correctness_table.txt"), &corr)?;
    Ok(())
}

/// Loads a suite report written by [`write_suite_outputs`].
pub fn load_suite_report(results_dir: &Path) -> Result<SuiteReport, HarnessError> {
    let path = results_dir.join("suite_report.json");
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::{BenchmarkReport, PpaRow};
    use crate::harness::suite::{BaselineCorrectness, BaselineEntry};
    use crate::model::{CorrectnessMetrics, DepthBand};

    fn suite(ppa: Option<PpaRow>, corr: Option<CorrectnessMetrics>) -> SuiteReport {
        SuiteReport {
            base_seed: 0,
            runs_per_benchmark: 5,
            benchmarks: vec![BenchmarkReport {
                id: "johnson_counter".into(),
                runs: vec![],
                correctness: corr,
                ppa,
            }],
        }
    }

    fn baselines() -> Baselines {
        let mut b = Baselines {
            provenance: "external".into(),
            ppa_flows: vec!["A".into()],
            ..Default::default()
        };
        let mut e = BaselineEntry::default();
        e.ppa.insert(
            "A".into(),
            BaselinePpa {
                area_um2: Some(42.0),
                power_uw: Some(4700.0),
                wns_ns: Some(-0.26),
            },
        );
        e.correctness = Some(BaselineCorrectness {
            syntax_pct: 85.0,
            struct_pct: 55.0,
            logic_pct: 55.0,
        });
        b.benchmark.insert("johnson_counter".into(), e);
        b
    }

    fn metrics(s: f64) -> CorrectnessMetrics {
        CorrectnessMetrics {
            n_total: 5,
            n_syntax_pass: 5,
            n_struct_pass: 0,
            s_syntax: 100.0,
            s_struct: s,
            s_logic: s,
            delta_struct: None,
            g_rel: None,
            depth_score: None,
            depth_band: Some(DepthBand::Medium),
            depth_weights: [0.2; 5],
            component_rates: None,
        }
    }

    #[test]
    fn ppa_row_cells() {
        let row = PpaRow {
            run_index: 0,
            candidate_id: 3,
            area_um2: 59.9,
            power_uw: 80.9,
            wns_ns: 0.2,
            j_ppa: 0.6,
        };
        let (ppa, _) = render_reports(&suite(Some(row), None), Some(&baselines()));
        let line = ppa.lines().nth(2).unwrap();
        let cells: Vec<&str> = line.split('|').map(str::trim).collect();
        assert_eq!(cells, ["johnson_counter", "42", "4700", "-0.26", "59.9", "80.9", "+0.20"]);
    }

    #[test]
    fn quantities() {
        assert_eq!(qty(59.9), "59.9");
        assert_eq!(qty(322.0), "322.0");
        assert_eq!(qty(7.05), "7.05");
        assert_eq!(qty(0.35 + 3.3 + 2.8), "6.45");
    }

    #[test]
    fn infeasible_row_dashes() {
        let (ppa, corr) = render_reports(&suite(None, None), None);
        let cells: Vec<&str> = ppa.lines().nth(2).unwrap().split('|').map(str::trim).collect();
        assert_eq!(cells, ["johnson_counter", "--", "--", "--"]);
        assert!(corr.lines().nth(2).unwrap().ends_with("--"));
    }

    #[test]
    fn correctness_delta_and_gain() {
        let (_, corr) = render_reports(&suite(None, Some(metrics(90.0))), Some(&baselines()));
        let cells: Vec<&str> = corr.lines().nth(2).unwrap().split('|').map(str::trim).collect();
        assert_eq!(cells[7], "+35");
        assert_eq!(cells[8], "+63.6");
        assert_eq!(cells[9], "Medium");
        let (_, corr) = render_reports(&suite(None, Some(metrics(0.0))), Some(&baselines()));
        let cells: Vec<&str> = corr.lines().nth(2).unwrap().split('|').map(str::trim).collect();
        assert_eq!(cells[7], "-55");
        assert_eq!(cells[8], "-100.0");
    }

    #[test]
    fn mismatched_baseline_renders_without_comparison() {
        let mut b = baselines();
        let e = b.benchmark.remove("johnson_counter").unwrap();
        b.benchmark.insert("other".into(), e);
        let (ppa, corr) = render_reports(&suite(None, Some(metrics(90.0))), Some(&b));
        assert!(ppa.lines().nth(2).unwrap().contains("--"));
        let cells: Vec<&str> = corr.lines().nth(2).unwrap().split('|').map(str::trim).collect();
        assert_eq!(&cells[1..4], ["--", "--", "--"]);
        assert_eq!(cells[7], "--");
    }
}
