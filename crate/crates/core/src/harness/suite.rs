// SPDX-License-Identifier: Apache-2.0

//! Benchmark suite and external baseline tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::HarnessError;
use crate::model::{Port, ProblemSpec};

/// One `[[benchmark]]` record as written in the suite file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: Spanned<String>,
    #[serde(default)]
    title: String,
    description: String,
    module_name: String,
    ports: Vec<Port>,
    #[serde(default)]
    constraints: Vec<String>,
    #[serde(default)]
    testbench_ref: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[serde(default)]
    benchmark: Vec<Record>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses suite text. `origin` names the source in errors.
pub fn parse_suite(text: &str, origin: &Path) -> Result<Vec<ProblemSpec>, HarnessError> {
    let err = |line: usize, message: String| HarnessError::Suite {
        path: origin.to_path_buf(),
        line,
        message,
    };
    if text.trim().is_empty() {
        log::warn!("suite {} is empty", origin.display());
        return Ok(Vec::new());
    }
    let file: SuiteFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        err(line, e.message().to_string())
    })?;
    if file.benchmark.is_empty() {
        log::warn!("suite {} has no [[benchmark]] records", origin.display());
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(file.benchmark.len());
    for r in file.benchmark {
        let line = line_of(text, r.id.span().start);
        let id = r.id.into_inner();
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(err(line, format!("duplicate benchmark id `{id}` (first defined on line {first})")));
        }
        let spec = ProblemSpec {
            title: if r.title.is_empty() { id.clone() } else { r.title },
            id,
            description: r.description,
            module_name: r.module_name,
            ports: r.ports,
            constraints: r.constraints,
            testbench_ref: r.testbench_ref,
        };
        spec.validate().map_err(|e| err(line, e.to_string()))?;
        out.push(spec);
    }
    Ok(out)
}

pub fn load_suite(path: &Path) -> Result<Vec<ProblemSpec>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_suite(&text, path)
}

/// Testbench path for a spec, relative to the suite file's directory.
pub fn testbench_path(suite_path: &Path, spec: &ProblemSpec) -> Option<PathBuf> {
    if spec.testbench_ref.trim().is_empty() {
        return None;
    }
    let p = Path::new(&spec.testbench_ref);
    Some(if p.is_relative() {
        suite_path.parent().unwrap_or(Path::new(".")).join(p)
    } else {
        p.to_path_buf()
    })
}

/// PPA figures of an external flow. `None` fields render as `--`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinePpa {
    pub area_um2: Option<f64>,
    pub power_uw: Option<f64>,
    pub wns_ns: Option<f64>,
}

/// Correctness percentages of an external flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineCorrectness {
    pub syntax_pct: f64,
    pub struct_pct: f64,
    pub logic_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineEntry {
    /// PPA columns keyed by flow label, in file order of the labels list.
    #[serde(default)]
    pub ppa: BTreeMap<String, BaselinePpa>,
    #[serde(default)]
    pub correctness: Option<BaselineCorrectness>,
}

/// Numbers reproduced verbatim from earlier studies; never recomputed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    #[serde(default)]
    pub provenance: String,
    /// Column order for the PPA flows.
    #[serde(default)]
    pub ppa_flows: Vec<String>,
    #[serde(default)]
    pub benchmark: BTreeMap<String, BaselineEntry>,
}

impl Baselines {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let b: Baselines = toml::from_str(&text).map_err(|e| HarnessError::Suite {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| line_of(&text, s.start)),
            message: e.message().to_string(),
        })?;
        for (id, entry) in &b.benchmark {
            if let Some(flow) = entry.ppa.keys().find(|k| !b.ppa_flows.contains(k)) {
                return Err(HarnessError::Config(format!(
                    "baseline `{id}` uses undeclared flow `{flow}`"
                )));
            }
        }
        Ok(b)
    }

    pub fn struct_pct(&self, id: &str) -> Option<f64> {
        self.benchmark.get(id)?.correctness.map(|c| c.struct_pct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"
[[benchmark]]
id = "a"
description = "first"
module_name = "a"
ports = [{ name = "clk", direction = "in", width_bits = 1 }]

[[benchmark]]
id = "b"
title = "B"
description = "second"
module_name = "b"
ports = [{ name = "y", direction = "out", width_bits = 4 }]
testbench_ref = "tb/b_tb.sv"
"#;

    #[test]
    fn parses_records() {
        let s = parse_suite(TWO, Path::new("suite.toml")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].title, "a");
        assert_eq!(s[1].ports[0].width_bits, 4);
        assert_eq!(
            testbench_path(Path::new("/x/suite.toml"), &s[1]),
            Some(PathBuf::from("/x/tb/b_tb.sv"))
        );
        assert_eq!(testbench_path(Path::new("/x/suite.toml"), &s[0]), None);
    }

    #[test]
    fn empty_is_valid() {
        assert!(parse_suite("", Path::new("s")).unwrap().is_empty());
        assert!(parse_suite("\n  \n", Path::new("s")).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_has_line() {
        let text = TWO.replace("id = \"b\"", "id = \"a\"");
        match parse_suite(&text, Path::new("s")) {
            Err(HarnessError::Suite { line, message, .. }) => {
                assert_eq!(line, 9);
                assert!(message.contains("duplicate"));
                assert!(message.contains("line 3"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_entry_has_line() {
        let text = TWO.replace("width_bits = 4", "width_bits = \"four\"");
        match parse_suite(&text, Path::new("s")) {
            Err(HarnessError::Suite { line, .. }) => assert_eq!(line, 13),
            other => panic!("{other:?}"),
        }
        let text = TWO.replace("description = \"second\"", "description = \"\"");
        assert!(matches!(parse_suite(&text, Path::new("s")), Err(HarnessError::Suite { line: 9, .. })));
    }
}
