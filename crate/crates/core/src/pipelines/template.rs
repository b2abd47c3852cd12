// SPDX-License-Identifier: Apache-2.0

//! Role prompt templates and runtime substitution.
//!
//! Placeholders are `{name}`; `{{` and `}}` produce literal braces. The
//! recognized names are `spec`, `rtl`, `feedback`, `title`, `description`,
//! `module_name`, `ports`, and `constraints`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FeedbackPacket, ProblemSpec, Role};

pub const SYSTEM_BASE: &str = "You are an expert RTL engineer.\n\
Return ONLY synthesizable SystemVerilog code (no markdown, no explanation).\n\
Keep module name and ports exactly as specified.";

pub const SYSTEM_CRITIQUE: &str = "You are an expert RTL engineer.\n\
Return ONLY the requested JSON object (no markdown, no explanation).";

const PLACEHOLDERS: [&str; 8] = [
    "spec",
    "rtl",
    "feedback",
    "title",
    "description",
    "module_name",
    "ports",
    "constraints",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("unresolved placeholder `{{{0}}}`")]
    Unresolved(String),
    #[error("unterminated placeholder starting at byte {0}")]
    Unterminated(usize),
    #[error("role `{0}` takes no RTL input")]
    UnexpectedRtl(Role),
    #[error("role `{0}` requires RTL input")]
    MissingRtl(Role),
    #[error("template for `{role}`: {reason}")]
    Invalid { role: Role, reason: String },
    #[error("reading template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputContract {
    RtlOnly,
    CritiqueJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleTemplate {
    pub role: Role,
    pub system_text: String,
    pub body_template: String,
    pub output_contract: OutputContract,
}

#[derive(Debug, PartialEq)]
enum Piece<'a> {
    Text(&'a str),
    Brace(char),
    Slot(&'a str),
}

fn tokenize(template: &str) -> Result<Vec<Piece<'_>>, TemplateError> {
    let mut out = Vec::new();
    let bytes = template.as_bytes();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' | b'}' if bytes.get(i + 1) == Some(&bytes[i]) => {
                out.push(Piece::Text(&template[start..i]));
                out.push(Piece::Brace(bytes[i] as char));
                i += 2;
                start = i;
            }
            b'{' => {
                let end = template[i + 1..]
                    .find('}')
                    .map(|off| i + 1 + off)
                    .ok_or(TemplateError::Unterminated(i))?;
                out.push(Piece::Text(&template[start..i]));
                out.push(Piece::Slot(template[i + 1..end].trim()));
                i = end + 1;
                start = i;
            }
            _ => i += 1,
        }
    }
    out.push(Piece::Text(&template[start..]));
    Ok(out)
}

/// Placeholder names used by a template body, in order of first use.
pub fn placeholders(template: &str) -> Result<Vec<String>, TemplateError> {
    let mut names: Vec<String> = Vec::new();
    for piece in tokenize(template)? {
        if let Piece::Slot(name) = piece {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
    }
    Ok(names)
}

impl RoleTemplate {
    /// Builds a template and checks the role contract: the generator must not
    /// reference `{rtl}`, every other role must, and every placeholder must
    /// be one of the recognized names.
    pub fn new(role: Role, body_template: impl Into<String>) -> Result<Self, TemplateError> {
        let (system_text, output_contract) = match role {
            Role::Critique => (SYSTEM_CRITIQUE, OutputContract::CritiqueJson),
            _ => (SYSTEM_BASE, OutputContract::RtlOnly),
        };
        let t = RoleTemplate {
            role,
            system_text: system_text.to_string(),
            body_template: body_template.into(),
            output_contract,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TemplateError> {
        let names = placeholders(&self.body_template)?;
        if let Some(bad) = names.iter().find(|n| !PLACEHOLDERS.contains(&n.as_str())) {
            return Err(TemplateError::Unresolved(bad.clone()));
        }
        let has_rtl = names.iter().any(|n| n == "rtl");
        let invalid = |reason: &str| TemplateError::Invalid {
            role: self.role,
            reason: reason.to_string(),
        };
        match (self.role, has_rtl) {
            (Role::Generator, true) => return Err(invalid("generator must not use {rtl}")),
            (Role::Generator, false) | (_, true) => {}
            (_, false) => return Err(invalid("template must use {rtl}")),
        }
        if self.output_contract == OutputContract::RtlOnly
            && !self
                .system_text
                .contains("Return ONLY synthesizable SystemVerilog code")
        {
            return Err(invalid("system text lacks the RTL-only clause"));
        }
        Ok(())
    }

    pub fn requires_rtl(&self) -> bool {
        self.role != Role::Generator
    }
}

/// Renders the spec block used by `{spec}`.
pub fn render_spec(spec: &ProblemSpec) -> String {
    let mut s = format!("{}: {}\nMODULE: {}({})", spec.title, spec.description, spec.module_name, spec.port_list());
    if !spec.constraints.is_empty() {
        s.push_str("\nCONSTRAINTS: ");
        s.push_str(&spec.constraints.join("; "));
    }
    s
}

/// Renders the delimited feedback block appended to prompts.
pub fn render_feedback(fb: &FeedbackPacket) -> String {
    let mut s = String::from("--- TOOL FEEDBACK ---\n");
    let mut section = |title: &str, items: &[String]| {
        if !items.is_empty() {
            s.push_str(title);
            s.push_str(":\n");
            for item in items {
                s.push_str("  ");
                s.push_str(item);
                s.push('\n');
            }
        }
    };
    section("COMPILE ERRORS", &fb.compile_errors);
    section("SIMULATION FAILURES", &fb.sim_failures);
    section("WARNINGS", &fb.warnings);
    section("IDS", &fb.timestamps_or_ids);
    if !fb.log_slice.is_empty() {
        s.push_str("LOG SLICE:\n");
        s.push_str(&fb.log_slice);
        if !fb.log_slice.ends_with('\n') {
            s.push('\n');
        }
    }
    s.push_str("--- END FEEDBACK ---");
    s
}

/// Substitutes every placeholder. Feedback, when present and non-empty, goes
/// into `{feedback}` if the template has it and is appended otherwise.
pub fn render_prompt(
    template: &RoleTemplate,
    spec: &ProblemSpec,
    rtl: Option<&str>,
    feedback: Option<&FeedbackPacket>,
) -> Result<(String, String), TemplateError> {
    match (template.requires_rtl(), rtl.is_some()) {
        (false, true) => return Err(TemplateError::UnexpectedRtl(template.role)),
        (true, false) => return Err(TemplateError::MissingRtl(template.role)),
        _ => {}
    }
    let feedback_text = feedback
        .filter(|fb| !fb.is_empty())
        .map(render_feedback)
        .unwrap_or_default();
    let mut used_feedback = false;
    let mut user = String::new();
    for piece in tokenize(&template.body_template)? {
        match piece {
            Piece::Text(t) => user.push_str(t),
            Piece::Brace(c) => user.push(c),
            Piece::Slot(name) => match name {
                "spec" => user.push_str(&render_spec(spec)),
                "rtl" => user.push_str(rtl.unwrap_or_default()),
                "feedback" => {
                    used_feedback = true;
                    user.push_str(&feedback_text);
                }
                "title" => user.push_str(&spec.title),
                "description" => user.push_str(&spec.description),
                "module_name" => user.push_str(&spec.module_name),
                "ports" => user.push_str(&spec.port_list()),
                "constraints" => user.push_str(&spec.constraints.join("; ")),
                other => return Err(TemplateError::Unresolved(other.to_string())),
            },
        }
    }
    if !used_feedback && !feedback_text.is_empty() {
        if !user.ends_with('\n') {
            user.push('\n');
        }
        user.push_str(&feedback_text);
    }
    Ok((template.system_text.clone(), user))
}

/// Role templates keyed by benchmark, with a fallback set.
#[derive(Debug, Clone, Default)]
pub struct TemplateLibrary {
    default: BTreeMap<Role, RoleTemplate>,
    per_benchmark: BTreeMap<String, BTreeMap<Role, RoleTemplate>>,
}

fn read_role_dir(dir: &Path) -> Result<BTreeMap<Role, RoleTemplate>, TemplateError> {
    let mut out = BTreeMap::new();
    for role in Role::ALL {
        let path = dir.join(format!("{}.txt", role.as_str()));
        if !path.exists() {
            continue;
        }
        let body = fs::read_to_string(&path).map_err(|e| TemplateError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        out.insert(role, RoleTemplate::new(role, body.trim_end())?);
    }
    Ok(out)
}

impl TemplateLibrary {
    /// Built-in generic templates.
    pub fn builtin() -> Self {
        let mut default = BTreeMap::new();
        for (role, body) in [
            (Role::Generator, include_str!("../../data/templates/default/generator.txt")),
            (
                Role::ConservativeMutator,
                include_str!("../../data/templates/default/conservative_mutator.txt"),
            ),
            (
                Role::AggressiveMutator,
                include_str!("../../data/templates/default/aggressive_mutator.txt"),
            ),
            (Role::Critique, include_str!("../../data/templates/default/critique.txt")),
        ] {
            let t = RoleTemplate::new(role, body.trim_end()).expect("built-in template is valid");
            default.insert(role, t);
        }
        TemplateLibrary {
            default,
            per_benchmark: BTreeMap::new(),
        }
    }

    /// Loads `<root>/default/<role>.txt` and `<root>/<benchmark>/<role>.txt`.
    /// Missing files fall back to the built-in set.
    pub fn load(root: &Path) -> Result<Self, TemplateError> {
        let mut lib = TemplateLibrary::builtin();
        let entries = fs::read_dir(root).map_err(|e| TemplateError::Io {
            path: root.display().to_string(),
            message: e.to_string(),
        })?;
        let mut dirs: Vec<_> = entries
            .filter_map(Result::ok)
            .filter(|e| e.path().is_dir())
            .collect();
        dirs.sort_by_key(|e| e.file_name());
        for entry in dirs {
            let name = entry.file_name().to_string_lossy().into_owned();
            let roles = read_role_dir(&entry.path())?;
            if name == "default" {
                lib.default.extend(roles);
            } else {
                lib.per_benchmark.insert(name, roles);
            }
        }
        Ok(lib)
    }

    pub fn get(&self, benchmark_id: &str, role: Role) -> &RoleTemplate {
        self.per_benchmark
            .get(benchmark_id)
            .and_then(|m| m.get(&role))
            .unwrap_or_else(|| &self.default[&role])
    }
}

/// Strips a markdown code fence if the response has one. Returns the inner
/// text and whether anything was stripped.
pub fn strip_code_fence(response: &str) -> (String, bool) {
    let Some(open) = response.find("```") else {
        return (response.to_string(), false);
    };
    let after = &response[open + 3..];
    // Skip the info string (e.g. `systemverilog`) up to the end of the line.
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let body = &after[body_start..];
    let inner = match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    };
    (inner.trim_matches('\n').to_string(), true)
}

/// True if the text contains a `module` keyword token.
pub fn has_module_token(source: &str) -> bool {
    source
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
        .any(|tok| tok == "module")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Port, PortDirection};

    fn johnson() -> ProblemSpec {
        ProblemSpec {
            id: "johnson_counter".into(),
            title: "johnson_counter".into(),
            description: "4-bit Johnson counter with specific cyclic state sequence".into(),
            module_name: "johnson_counter".into(),
            ports: vec![
                Port {
                    name: "clk".into(),
                    direction: PortDirection::In,
                    width_bits: 1,
                },
                Port {
                    name: "q".into(),
                    direction: PortDirection::Out,
                    width_bits: 8,
                },
            ],
            constraints: vec!["synchronous reset".into(), "all regs reset".into()],
            testbench_ref: String::new(),
        }
    }

    #[test]
    fn escaped_braces_are_literal() {
        let t = RoleTemplate::new(Role::Critique, "RTL: {rtl}\nJSON only: {{syntax, reset}}").unwrap();
        let (_, user) = render_prompt(&t, &johnson(), Some("x"), None).unwrap();
        assert_eq!(user, "RTL: x\nJSON only: {syntax, reset}");
    }

    #[test]
    fn unknown_placeholder_is_named() {
        let err = RoleTemplate::new(Role::Generator, "TASK: {task}").unwrap_err();
        assert_eq!(err, TemplateError::Unresolved("task".into()));
        assert!(err.to_string().contains("{task}"));
    }

    #[test]
    fn generator_rejects_rtl() {
        assert!(RoleTemplate::new(Role::Generator, "REF: {rtl}").is_err());
        let t = RoleTemplate::new(Role::Generator, "TASK: {spec}").unwrap();
        assert_eq!(
            render_prompt(&t, &johnson(), Some("module m; endmodule"), None),
            Err(TemplateError::UnexpectedRtl(Role::Generator))
        );
    }

    #[test]
    fn mutators_require_rtl() {
        assert!(RoleTemplate::new(Role::ConservativeMutator, "TASK: fix").is_err());
        let t = RoleTemplate::new(Role::ConservativeMutator, "REF: {rtl}").unwrap();
        assert_eq!(
            render_prompt(&t, &johnson(), None, None),
            Err(TemplateError::MissingRtl(Role::ConservativeMutator))
        );
    }

    #[test]
    fn conservative_prompt_starts_with_ref() {
        let lib = TemplateLibrary::builtin();
        let t = lib.get("anything", Role::ConservativeMutator);
        let (system, user) = render_prompt(t, &johnson(), Some("module m; endmodule"), None).unwrap();
        assert!(user.starts_with("REF: module m; endmodule"));
        assert!(system.contains("Return ONLY synthesizable SystemVerilog code"));
    }

    #[test]
    fn feedback_is_appended_when_not_placed() {
        let t = RoleTemplate::new(Role::AggressiveMutator, "REF: {rtl}").unwrap();
        let fb = FeedbackPacket {
            compile_errors: vec!["Error-[SE] Syntax error".into()],
            log_slice: "Error-[SE] Syntax error\n  near line 3".into(),
            ..FeedbackPacket::default()
        };
        let (_, user) = render_prompt(&t, &johnson(), Some("m"), Some(&fb)).unwrap();
        assert!(user.starts_with("REF: m\n--- TOOL FEEDBACK ---"));
        assert!(user.contains("Error-[SE] Syntax error\n  near line 3"));
        assert!(user.ends_with("--- END FEEDBACK ---"));
    }

    #[test]
    fn empty_feedback_adds_nothing() {
        let t = RoleTemplate::new(Role::AggressiveMutator, "REF: {rtl}").unwrap();
        let (_, user) =
            render_prompt(&t, &johnson(), Some("m"), Some(&FeedbackPacket::default())).unwrap();
        assert_eq!(user, "REF: m");
    }

    #[test]
    fn rendering_is_deterministic() {
        let lib = TemplateLibrary::builtin();
        let t = lib.get("johnson_counter", Role::Generator);
        let a = render_prompt(t, &johnson(), None, None).unwrap();
        let b = render_prompt(t, &johnson(), None, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fence_stripping() {
        let (s, stripped) = strip_code_fence("Here:\n```systemverilog\nmodule m;\nendmodule\n```\nbye");
        assert!(stripped);
        assert_eq!(s, "module m;\nendmodule");
        let (s, stripped) = strip_code_fence("module m; endmodule");
        assert!(!stripped);
        assert_eq!(s, "module m; endmodule");
    }

    #[test]
    fn module_token_detection() {
        assert!(has_module_token("module m; endmodule"));
        assert!(!has_module_token("I cannot help with that."));
        assert!(!has_module_token("submodule_x endmodule"));
    }
}
