// SPDX-License-Identifier: Apache-2.0

//! Extraction of area, power, and slack from synthesis report text.

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objectives::sum_power;

#[derive(Debug, Error, PartialEq)]
pub enum PpaParseError {
    #[error("{field}: report text is empty")]
    Empty { field: &'static str },
    #[error("{field}: no line matched the extraction pattern")]
    Missing { field: &'static str },
    #[error("{field}: contradictory values {first} and {second}")]
    Ambiguous {
        field: &'static str,
        first: f64,
        second: f64,
    },
    #[error("{field}: cannot read number {text:?}")]
    Number { field: &'static str, text: String },
    #[error("{field}: unknown power unit {unit:?}")]
    Unit { field: &'static str, unit: String },
    #[error("invalid pattern for {field}: {source}")]
    Pattern {
        field: &'static str,
        #[source]
        source: regex::Error,
    },
}

/// Extraction patterns. Group 1 captures the number; power patterns may
/// capture a unit in group 2 (W, mW, uW, nW, pW), defaulting to
/// `power_default_unit`. The slack pattern may capture `MET`/`VIOLATED` in a
/// group named `status`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpaPatterns {
    pub area: String,
    pub leakage: String,
    pub internal: String,
    pub switching: String,
    pub slack: String,
    pub power_default_unit: String,
}

impl Default for PpaPatterns {
    fn default() -> Self {
        PpaPatterns {
            area: r"(?m)^\s*Total cell area:\s*([-+0-9.eE]+)".into(),
            leakage: r"(?m)^\s*Cell Leakage Power\s*=\s*([-+0-9.eE]+)\s*([munp]?W)?".into(),
            internal: r"(?m)^\s*Cell Internal Power\s*=\s*([-+0-9.eE]+)\s*([munp]?W)?".into(),
            switching: r"(?m)^\s*Net Switching Power\s*=\s*([-+0-9.eE]+)\s*([munp]?W)?".into(),
            slack: r"(?m)^\s*slack\s*\((?P<status>MET|VIOLATED)[^)]*\)\s*([-+0-9.eE]+)".into(),
            power_default_unit: "uW".into(),
        }
    }
}

/// Parsed values: area in um^2, power components in uW, WNS in ns
/// (negative means violated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsedPpa {
    pub area_um2: f64,
    pub power_uw: [f64; 3],
    pub wns_ns: f64,
}

impl ParsedPpa {
    pub fn power_total_uw(&self) -> f64 {
        sum_power(self.power_uw)
    }
}

fn unit_scale(field: &'static str, unit: &str) -> Result<f64, PpaParseError> {
    Ok(match unit {
        "W" => 1e6,
        "mW" => 1e3,
        "uW" => 1.0,
        "nW" => 1e-3,
        "pW" => 1e-6,
        other => {
            return Err(PpaParseError::Unit {
                field,
                unit: other.to_string(),
            })
        }
    })
}

fn compile(field: &'static str, pat: &str) -> Result<Regex, PpaParseError> {
    Regex::new(pat).map_err(|source| PpaParseError::Pattern { field, source })
}

fn number(field: &'static str, s: &str) -> Result<f64, PpaParseError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PpaParseError::Number {
            field,
            text: s.to_string(),
        })
}

/// All matches must agree; identical duplicates are fine.
fn single(
    field: &'static str,
    text: &str,
    pat: &str,
    default_unit: Option<&str>,
) -> Result<f64, PpaParseError> {
    let re = compile(field, pat)?;
    let mut found: Option<f64> = None;
    for caps in re.captures_iter(text) {
        let raw = caps.get(1).ok_or(PpaParseError::Missing { field })?.as_str();
        let mut v = number(field, raw)?;
        if let Some(default_unit) = default_unit {
            let unit = caps.get(2).map_or(default_unit, |m| m.as_str());
            v *= unit_scale(field, unit)?;
        }
        match found {
            None => found = Some(v),
            Some(prev) if prev == v => {}
            Some(prev) => {
                return Err(PpaParseError::Ambiguous {
                    field,
                    first: prev,
                    second: v,
                })
            }
        }
    }
    found.ok_or(PpaParseError::Missing { field })
}

/// Worst slack over every reported path. A `VIOLATED` path printed with a
/// positive magnitude is negated.
fn worst_slack(text: &str, pat: &str) -> Result<f64, PpaParseError> {
    const FIELD: &str = "slack";
    let re = compile(FIELD, pat)?;
    let value_group = re.captures_len() - 1;
    let mut worst: Option<f64> = None;
    for caps in re.captures_iter(text) {
        let raw = caps
            .get(value_group)
            .ok_or(PpaParseError::Missing { field: FIELD })?
            .as_str();
        let mut v = number(FIELD, raw)?;
        if caps.name("status").is_some_and(|s| s.as_str() == "VIOLATED") && v > 0.0 {
            v = -v;
        }
        worst = Some(worst.map_or(v, |w: f64| w.min(v)));
    }
    worst.ok_or(PpaParseError::Missing { field: FIELD })
}

pub fn parse_ppa(
    timing_text: &str,
    area_text: &str,
    power_text: &str,
    patterns: &PpaPatterns,
) -> Result<ParsedPpa, PpaParseError> {
    for (field, text) in [("timing", timing_text), ("area", area_text), ("power", power_text)] {
        if text.trim().is_empty() {
            return Err(PpaParseError::Empty { field });
        }
    }
    let unit = Some(patterns.power_default_unit.as_str());
    unit_scale("power_default_unit", &patterns.power_default_unit)?;
    let area_um2 = single("area", area_text, &patterns.area, None)?;
    let power_uw = [
        single("leakage", power_text, &patterns.leakage, unit)?,
        single("internal", power_text, &patterns.internal, unit)?,
        single("switching", power_text, &patterns.switching, unit)?,
    ];
    let wns_ns = worst_slack(timing_text, &patterns.slack)?;
    Ok(ParsedPpa {
        area_um2,
        power_uw,
        wns_ns,
    })
}

/// Report texts in the layout the default patterns read. Used by the mock
/// adapter and fixtures.
pub fn render_reports(ppa: &ParsedPpa) -> (String, String, String) {
    let status = if ppa.wns_ns < 0.0 { "VIOLATED" } else { "MET" };
    let timing = format!(
        "****************************************\nReport : timing\n        -path full\n        -delay max\n        -max_paths 1\n****************************************\n\n  data required time                         {req:.4}\n  data arrival time                          {arr:.4}\n  --------------------------------------------------------\n  slack ({status})                             {wns:.4}\n",
        req = 1.0,
        arr = 1.0 - ppa.wns_ns,
        wns = ppa.wns_ns,
    );
    let area = format!(
        "****************************************\nReport : area\n****************************************\n\nCombinational area:       {comb:.4}\nNoncombinational area:    {seq:.4}\n\nTotal cell area:          {total:.4}\n",
        comb = ppa.area_um2 * 0.5,
        seq = ppa.area_um2 - ppa.area_um2 * 0.5,
        total = ppa.area_um2,
    );
    let [leak, internal, switch] = ppa.power_uw;
    let power = format!(
        "****************************************\nReport : power\n****************************************\n\n  Cell Internal Power  = {internal:.4} uW\n  Net Switching Power  = {switch:.4} uW\n                         ---------\nTotal Dynamic Power    = {dynamic:.4} uW\n\nCell Leakage Power     = {leak:.4} uW\n",
        dynamic = internal + switch,
    );
    (timing, area, power)
}
