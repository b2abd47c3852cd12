// SPDX-License-Identifier: Apache-2.0

//! Turning raw tool logs into the feedback packet threaded into prompts.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::FeedbackPacket;

pub const DEFAULT_CONTEXT_LINES: usize = 20;

/// Pattern sources; compiled into [`LogPatterns`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogPatternConfig {
    pub error_patterns: Vec<String>,
    pub warning_patterns: Vec<String>,
    pub id_patterns: Vec<String>,
}

impl Default for LogPatternConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|p| p.to_string()).collect();
        LogPatternConfig {
            error_patterns: s(&[
                r"(?i)\berror\b",
                r"(?i)\bfatal\b",
                r"(?i)\bassert(ion)?\b.*\bfail",
                r"(?i)\btest(s)? failed\b",
                r"(?i)\bmismatch\b",
                r"(?i)\btimed out\b",
            ]),
            warning_patterns: s(&[r"(?i)\bwarning\b"]),
            id_patterns: s(&[
                r"(?:Error|Warning|Lint)-\[[A-Za-z0-9_.-]+\]",
                r"(?i)\btime\s*[:=]?\s*\d+(?:\.\d+)?\s*(?:fs|ps|ns|us|ms)\b",
                r"@\s*\d+(?:\.\d+)?\s*(?:fs|ps|ns|us|ms)\b",
            ]),
        }
    }
}

/// Compiled line classifiers.
#[derive(Debug, Clone)]
pub struct LogPatterns {
    errors: Vec<Regex>,
    warnings: Vec<Regex>,
    ids: Vec<Regex>,
}

impl Default for LogPatterns {
    fn default() -> Self {
        LogPatterns::compile(&LogPatternConfig::default()).expect("default patterns compile")
    }
}

impl LogPatterns {
    pub fn compile(cfg: &LogPatternConfig) -> Result<Self, regex::Error> {
        let all = |v: &[String]| v.iter().map(|p| Regex::new(p)).collect::<Result<Vec<_>, _>>();
        Ok(LogPatterns {
            errors: all(&cfg.error_patterns)?,
            warnings: all(&cfg.warning_patterns)?,
            ids: all(&cfg.id_patterns)?,
        })
    }

    pub fn is_error(&self, line: &str) -> bool {
        self.errors.iter().any(|r| r.is_match(line))
    }

    /// Error lines are never also counted as warnings.
    pub fn is_warning(&self, line: &str) -> bool {
        !self.is_error(line) && self.warnings.iter().any(|r| r.is_match(line))
    }

    pub fn has_error(&self, log: &str) -> bool {
        log.lines().any(|l| self.is_error(l))
    }

    pub fn warning_count(&self, log: &str) -> u32 {
        log.lines().filter(|l| self.is_warning(l)).count() as u32
    }

    fn ids_in<'a>(&'a self, line: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.ids
            .iter()
            .flat_map(move |r| r.find_iter(line).map(|m| m.as_str()))
    }
}

/// Byte range of `count` lines starting at line `first`, without the
/// trailing newline, so the slice is an exact substring of `log`.
fn line_span(log: &str, first: usize, count: usize) -> &str {
    let mut start = None;
    let mut end = log.len();
    let mut offset = 0;
    for (i, line) in log.split_inclusive('\n').enumerate() {
        if i == first {
            start = Some(offset);
        }
        offset += line.len();
        if i + 1 == first + count {
            end = offset;
            break;
        }
    }
    let Some(start) = start else { return "" };
    log[start..end].trim_end_matches(['\n', '\r'])
}

fn first_error_slice(log: &str, patterns: &LogPatterns, context_lines: usize) -> Option<String> {
    let idx = log.lines().position(|l| patterns.is_error(l))?;
    Some(line_span(log, idx, context_lines + 1).to_string())
}

/// Classifies both logs and slices the first error (compile log first) plus
/// up to `context_lines` following lines from the log it appeared in.
pub fn build_feedback_packet(
    compile_log: &str,
    sim_log: &str,
    patterns: &LogPatterns,
    context_lines: usize,
) -> FeedbackPacket {
    let mut packet = FeedbackPacket::default();
    for (log, is_compile) in [(compile_log, true), (sim_log, false)] {
        for line in log.lines() {
            let line_t = line.trim_end();
            if patterns.is_error(line_t) {
                if is_compile {
                    packet.compile_errors.push(line_t.to_string());
                } else {
                    packet.sim_failures.push(line_t.to_string());
                }
            } else if patterns.is_warning(line_t) {
                packet.warnings.push(line_t.to_string());
            }
            for id in patterns.ids_in(line_t) {
                if !packet.timestamps_or_ids.iter().any(|x| x == id) {
                    packet.timestamps_or_ids.push(id.to_string());
                }
            }
        }
    }
    packet.log_slice = first_error_slice(compile_log, patterns, context_lines)
        .or_else(|| first_error_slice(sim_log, patterns, context_lines))
        .unwrap_or_default();
    packet
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_logs_empty_packet() {
        let p = build_feedback_packet("", "", &LogPatterns::default(), DEFAULT_CONTEXT_LINES);
        assert!(p.is_empty());
        assert_eq!(p.log_slice, "");
    }

    #[test]
    fn slice_starts_at_first_error() {
        let log: String = (1..=200)
            .map(|i| {
                if i == 12 {
                    "Error-[SE] Syntax error: expecting ';'\n".to_string()
                } else {
                    format!("line {i}\n")
                }
            })
            .collect();
        let p = build_feedback_packet(&log, "", &LogPatterns::default(), 20);
        let lines: Vec<&str> = p.log_slice.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[0].starts_with("Error-[SE]"));
        assert_eq!(lines[20], "line 32");
        assert!(log.contains(&p.log_slice));
        assert_eq!(p.timestamps_or_ids, vec!["Error-[SE]".to_string()]);
    }

    #[test]
    fn sim_assertion_failure() {
        let sim = "Chronologic VCS simulator\n\"tb.sv\", 40: tb.chk: started at 125ns failed at 125ns\n\tOffending 'state == RED'\nAssertion failed: state transition at time 125 ns\n$finish at simulation time 130 ns\n";
        let p = build_feedback_packet("compiled ok\n", sim, &LogPatterns::default(), 2);
        assert!(p.compile_errors.is_empty());
        assert_eq!(
            p.sim_failures,
            vec!["Assertion failed: state transition at time 125 ns".to_string()]
        );
        assert!(p.log_slice.starts_with("Assertion failed"));
        assert!(p.timestamps_or_ids.contains(&"time 125 ns".to_string()));
    }

    #[test]
    fn slice_is_substring_with_crlf() {
        let log = "ok\r\nerror: bad\r\nnext\r\nmore\r\n";
        let p = build_feedback_packet(log, "", &LogPatterns::default(), 1);
        assert_eq!(p.log_slice, "error: bad\r\nnext");
        assert!(log.contains(&p.log_slice));
    }

    #[test]
    fn warnings_are_counted_once() {
        let pats = LogPatterns::default();
        let log = "Warning-[LCA] lint\nwarning: unused\nError: warning escalated\n";
        assert_eq!(pats.warning_count(log), 2);
        let p = build_feedback_packet(log, "", &pats, 0);
        assert_eq!(p.warnings.len(), 2);
        assert_eq!(p.compile_errors.len(), 1);
        assert_eq!(p.log_slice, "Error: warning escalated");
    }
}
