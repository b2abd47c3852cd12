// SPDX-License-Identifier: Apache-2.0

//! Pluggable text-generation backends.
//!
//! * [`ReplayBackend`] serves fixture files `<seq>_<role>.txt` from a
//!   directory in ascending `seq` order.
//! * [`WireBackend`] speaks a configurable chat-completion style HTTP
//!   contract.
//! * [`MockBackend`] synthesizes skeleton RTL and perfect critiques.
//!
//! [`ArchivingBackend`] wraps any of them and persists every call.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{ProblemSpec, Role};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub max_length: u32,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_length: 4096,
            temperature: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationRequest<'a> {
    pub role: Role,
    pub iteration: u32,
    pub system: &'a str,
    pub user: &'a str,
    pub params: GenParams,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("server returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("replay fixtures exhausted for role `{0}`")]
    Exhausted(Role),
    #[error("replay fixture {fixture} is for `{found}`, request is for `{requested}`")]
    RoleMismatch {
        fixture: String,
        found: String,
        requested: Role,
    },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("archive write failed: {0}")]
    Archive(String),
}

pub trait GenerationBackend: Send {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<String, BackendError>;
}

/// Calls `backend` once; the wire backend applies its own retry policy.
pub fn generate(
    backend: &mut dyn GenerationBackend,
    role: Role,
    iteration: u32,
    system: &str,
    user: &str,
    params: GenParams,
) -> Result<String, BackendError> {
    backend.generate(&GenerationRequest {
        role,
        iteration,
        system,
        user,
        params,
    })
}

// ---------------------------------------------------------------------------
// Replay

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayOrder {
    /// The next fixture overall must match the requested role.
    #[default]
    Strict,
    /// Each role consumes its own fixtures in ascending `seq` order.
    PerRole,
    /// Two queues by output contract: every RTL-producing role reads the
    /// next RTL fixture whatever its recorded role, critique reads the
    /// critique fixtures. Outcomes then do not depend on which mutator the
    /// bandit picked.
    ByContract,
}

#[derive(Debug, Clone)]
struct Fixture {
    seq: u64,
    role: Role,
    name: String,
    path: PathBuf,
}

/// Replays recorded responses. File names are `<seq>_<role>.txt` where
/// `seq` is a decimal integer; other files are ignored.
#[derive(Debug)]
pub struct ReplayBackend {
    fixtures: Vec<Fixture>,
    order: ReplayOrder,
    cycle: bool,
    cursor: usize,
    per_role: BTreeMap<Role, usize>,
}

fn parse_fixture_name(name: &str) -> Option<(u64, &str)> {
    let stem = name.strip_suffix(".txt")?;
    let (seq, role) = stem.split_once('_')?;
    Some((seq.parse().ok()?, role))
}

impl ReplayBackend {
    pub fn open(dir: &Path, order: ReplayOrder, cycle: bool) -> Result<Self, BackendError> {
        let entries = fs::read_dir(dir)
            .map_err(|e| BackendError::Config(format!("replay dir {}: {e}", dir.display())))?;
        let mut fixtures = Vec::new();
        for entry in entries.filter_map(Result::ok) {
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some((seq, role)) = parse_fixture_name(&name) else {
                continue;
            };
            let role = Role::parse(role).ok_or_else(|| {
                BackendError::Config(format!("fixture {name}: unknown role `{role}`"))
            })?;
            fixtures.push(Fixture {
                seq,
                role,
                name,
                path: entry.path(),
            });
        }
        fixtures.sort_by(|a, b| a.seq.cmp(&b.seq).then_with(|| a.name.cmp(&b.name)));
        if let Some(w) = fixtures.windows(2).find(|w| w[0].seq == w[1].seq) {
            return Err(BackendError::Config(format!(
                "duplicate fixture sequence number {} ({}, {})",
                w[0].seq, w[0].name, w[1].name
            )));
        }
        Ok(ReplayBackend {
            fixtures,
            order,
            cycle,
            cursor: 0,
            per_role: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    fn read(f: &Fixture) -> Result<String, BackendError> {
        fs::read_to_string(&f.path)
            .map_err(|e| BackendError::Config(format!("reading fixture {}: {e}", f.name)))
    }

    fn next_strict(&mut self, role: Role) -> Result<String, BackendError> {
        if self.cursor >= self.fixtures.len() {
            if !self.cycle || self.fixtures.is_empty() {
                return Err(BackendError::Exhausted(role));
            }
            self.cursor = 0;
        }
        let f = &self.fixtures[self.cursor];
        if f.role != role {
            return Err(BackendError::RoleMismatch {
                fixture: f.name.clone(),
                found: f.role.to_string(),
                requested: role,
            });
        }
        self.cursor += 1;
        Self::read(f)
    }

    fn next_matching(
        &mut self,
        role: Role,
        key: Role,
        pred: impl Fn(Role) -> bool,
    ) -> Result<String, BackendError> {
        let matching: Vec<usize> = (0..self.fixtures.len())
            .filter(|&i| pred(self.fixtures[i].role))
            .collect();
        let pos = self.per_role.entry(key).or_insert(0);
        if *pos >= matching.len() {
            if !self.cycle || matching.is_empty() {
                return Err(BackendError::Exhausted(role));
            }
            *pos = 0;
        }
        let f = &self.fixtures[matching[*pos]];
        *pos += 1;
        Self::read(f)
    }
}

impl GenerationBackend for ReplayBackend {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<String, BackendError> {
        match self.order {
            ReplayOrder::Strict => self.next_strict(req.role),
            ReplayOrder::PerRole => self.next_matching(req.role, req.role, |r| r == req.role),
            ReplayOrder::ByContract => {
                let rtl = req.role.produces_rtl();
                let key = if rtl { Role::Generator } else { Role::Critique };
                self.next_matching(req.role, key, |r| r.produces_rtl() == rtl)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Mock

/// Deterministic stand-in for a model: RTL-producing roles get a small
/// synchronous-reset skeleton of the spec's module (with a per-call variant
/// comment), the critique role gets a perfect score.
#[derive(Debug, Clone)]
pub struct MockBackend {
    spec: ProblemSpec,
    calls: u64,
}

impl MockBackend {
    pub fn new(spec: ProblemSpec) -> Self {
        MockBackend { spec, calls: 0 }
    }
}

fn mock_rtl(spec: &ProblemSpec, variant: u64) -> String {
    use crate::model::PortDirection;
    let mut s = format!("// variant {variant}\nmodule {} (\n", spec.module_name);
    let ports: Vec<String> = spec
        .ports
        .iter()
        .map(|p| {
            let dir = match p.direction {
                PortDirection::In => "input  logic",
                PortDirection::Out => "output logic",
            };
            if p.width_bits > 1 {
                format!("  {dir} [{}:0] {}", p.width_bits - 1, p.name)
            } else {
                format!("  {dir} {}", p.name)
            }
        })
        .collect();
    s.push_str(&ports.join(",\n"));
    s.push_str("\n);\n");
    let has = |n: &str| spec.ports.iter().any(|p| p.name == n);
    let clk = if has("clk") { "clk" } else { "clock" };
    let rst = ["rst", "rst_n", "reset"].into_iter().find(|n| has(n)).unwrap_or("rst");
    let cond = if rst.ends_with("_n") { format!("!{rst}") } else { rst.to_string() };
    s.push_str(&format!("  always_ff @(posedge {clk}) begin\n    if ({cond}) begin\n"));
    let outs: Vec<_> = spec
        .ports
        .iter()
        .filter(|p| p.direction == PortDirection::Out)
        .collect();
    for p in &outs {
        s.push_str(&format!("      {} <= '0;\n", p.name));
    }
    s.push_str("    end else begin\n");
    for p in &outs {
        s.push_str(&format!("      {} <= {}; // hold\n", p.name, p.name));
    }
    s.push_str("    end\n  end\nendmodule\n");
    s
}

impl GenerationBackend for MockBackend {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<String, BackendError> {
        self.calls += 1;
        Ok(match req.role {
            Role::Critique => r#"{"syntax":1.0,"reset":1.0,"logic":1.0,"hazard":1.0}"#.to_string(),
            _ => mock_rtl(&self.spec, self.calls),
        })
    }
}

// ---------------------------------------------------------------------------
// Wire

/// Request key names for the chat-completion body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RequestFieldMap {
    pub model: String,
    pub messages: String,
    pub max_length: String,
    pub temperature: String,
    /// Empty to omit the seed from requests.
    pub seed: String,
}

impl Default for RequestFieldMap {
    fn default() -> Self {
        RequestFieldMap {
            model: "model".into(),
            messages: "messages".into(),
            max_length: "max_tokens".into(),
            temperature: "temperature".into(),
            seed: "seed".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub auth_env: Option<String>,
    pub model: String,
    #[serde(default)]
    pub request_fields: RequestFieldMap,
    /// Dotted path to the response text; numeric segments index arrays.
    #[serde(default = "default_response_path")]
    pub response_path: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_response_path() -> String {
    "choices.0.message.content".into()
}
fn default_timeout() -> u64 {
    120
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}

pub struct WireBackend {
    config: WireConfig,
    token: Option<String>,
    agent: ureq::Agent,
}

impl WireBackend {
    /// Reads the auth token (if configured) from the named variable.
    pub fn new(config: WireConfig) -> Result<Self, BackendError> {
        let token = match &config.auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::Config(format!("auth variable `{var}` is not set"))
            })?),
            None => None,
        };
        Ok(Self::with_token(config, token))
    }

    pub fn with_token(config: WireConfig, token: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_s.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        WireBackend {
            config,
            token,
            agent,
        }
    }

    fn body(&self, req: &GenerationRequest<'_>) -> Value {
        let f = &self.config.request_fields;
        let mut body = serde_json::Map::new();
        body.insert(f.model.clone(), json!(self.config.model));
        body.insert(
            f.messages.clone(),
            json!([
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ]),
        );
        body.insert(f.max_length.clone(), json!(req.params.max_length));
        body.insert(f.temperature.clone(), json!(req.params.temperature));
        if !f.seed.is_empty() {
            body.insert(f.seed.clone(), json!(req.params.seed));
        }
        Value::Object(body)
    }

    fn attempt(&self, body: &str) -> Result<(u16, String), String> {
        let mut call = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(token) = &self.token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = call.send(body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok((status, text))
    }
}

/// Follows a dotted path such as `choices.0.message.content`.
pub fn extract_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.')
        .filter(|s| !s.is_empty())
        .try_fold(value, |v, seg| match v {
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
            Value::Object(map) => map.get(seg),
            _ => None,
        })
}

impl GenerationBackend for WireBackend {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<String, BackendError> {
        let body = self.body(req).to_string();
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1).min(6)));
            }
            match self.attempt(&body) {
                Ok((status, text)) if (200..300).contains(&status) => {
                    let value: Value = serde_json::from_str(&text)
                        .map_err(|e| BackendError::Malformed(format!("not JSON: {e}")))?;
                    return extract_path(&value, &self.config.response_path)
                        .and_then(Value::as_str)
                        .map(str::to_string)
                        .ok_or_else(|| {
                            BackendError::Malformed(format!(
                                "no string at `{}`",
                                self.config.response_path
                            ))
                        });
                }
                Ok((status, text)) => {
                    return Err(BackendError::Status { status, body: text });
                }
                Err(e) => {
                    log::warn!("wire backend attempt {} failed: {e}", attempt + 1);
                    last = e;
                }
            }
        }
        Err(BackendError::Transport {
            attempts,
            message: last,
        })
    }
}

// ---------------------------------------------------------------------------
// Archive

/// One persisted generation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub run_id: String,
    pub seq: u64,
    pub iteration: u32,
    pub role: Role,
    pub system: String,
    pub user: String,
    pub response: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u128,
}

/// Records every call made through the wrapped backend. With a directory,
/// each response is also written as `<seq>_<role>.txt` (a valid replay
/// fixture) and the full record appended to `prompts.jsonl`.
pub struct ArchivingBackend {
    inner: Box<dyn GenerationBackend>,
    run_id: String,
    dir: Option<PathBuf>,
    records: Vec<PromptRecord>,
}

impl ArchivingBackend {
    pub fn new(inner: Box<dyn GenerationBackend>, run_id: impl Into<String>, dir: Option<PathBuf>) -> Result<Self, BackendError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| BackendError::Archive(format!("{}: {e}", d.display())))?;
        }
        Ok(ArchivingBackend {
            inner,
            run_id: run_id.into(),
            dir,
            records: Vec::new(),
        })
    }

    pub fn records(&self) -> &[PromptRecord] {
        &self.records
    }

    fn persist(&self, rec: &PromptRecord) -> Result<(), BackendError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let err = |e: std::io::Error| BackendError::Archive(e.to_string());
        fs::write(dir.join(format!("{:04}_{}.txt", rec.seq, rec.role)), &rec.response).map_err(err)?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("prompts.jsonl"))
            .map_err(err)?;
        let line = serde_json::to_string(rec).map_err(|e| BackendError::Archive(e.to_string()))?;
        writeln!(f, "{line}").map_err(err)
    }
}

impl GenerationBackend for ArchivingBackend {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<String, BackendError> {
        let response = self.inner.generate(req)?;
        let rec = PromptRecord {
            run_id: self.run_id.clone(),
            seq: self.records.len() as u64 + 1,
            iteration: req.iteration,
            role: req.role,
            system: req.system.to_string(),
            user: req.user.to_string(),
            response: response.clone(),
            timestamp_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis()),
        };
        self.persist(&rec)?;
        self.records.push(rec);
        Ok(response)
    }
}
