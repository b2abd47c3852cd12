// SPDX-License-Identifier: Apache-2.0

//! Parsing of critique responses into [`CritiqueScores`].

use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{CritiqueLevel, CritiqueScores};

const KEYS: [&str; 4] = ["syntax", "reset", "logic", "hazard"];

/// Every variant is recoverable: the caller treats the critique as absent.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CritiqueError {
    #[error("no JSON object found in critique response")]
    NoObject,
    #[error("critique object has wrong keys (missing: {missing:?}, extra: {extra:?})")]
    Schema {
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("critique field `{key}` has value {value}, expected one of 0.0, 0.5, 1.0")]
    Value { key: String, value: String },
}

/// Finds the first `{...}` in `raw` that parses as a JSON object.
fn first_object(raw: &str) -> Option<Map<String, Value>> {
    for (i, _) in raw.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(map))) = stream.next() {
            return Some(map);
        }
    }
    None
}

pub fn parse_critique(raw: &str) -> Result<CritiqueScores, CritiqueError> {
    let obj = first_object(raw).ok_or(CritiqueError::NoObject)?;
    let missing: Vec<String> = KEYS
        .iter()
        .filter(|k| !obj.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    let extra: Vec<String> = obj
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(CritiqueError::Schema { missing, extra });
    }
    let level = |key: &str| -> Result<CritiqueLevel, CritiqueError> {
        let v = &obj[key];
        v.as_f64()
            .and_then(|f| CritiqueLevel::try_from(f).ok())
            .ok_or_else(|| CritiqueError::Value {
                key: key.to_string(),
                value: v.to_string(),
            })
    };
    Ok(CritiqueScores {
        syntax: level("syntax")?,
        reset: level("reset")?,
        logic: level("logic")?,
        hazard: level("hazard")?,
    })
}
