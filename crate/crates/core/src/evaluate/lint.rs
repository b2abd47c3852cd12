// SPDX-License-Identifier: Apache-2.0

//! Lexical structural checks on SystemVerilog source.
//!
//! This is not an HDL parser. Source is tokenized (comments and strings
//! dropped) and `always` bodies are read into a small statement tree that is
//! just rich enough for four rules: reset coverage, assignment discipline,
//! case completeness, and pipeline-stage consistency. Anything the reader
//! cannot make sense of is skipped, and a rule with nothing to inspect
//! reports `NotApplicable`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Reset,
    AssignmentDiscipline,
    FsmCompleteness,
    PipelineConsistency,
}

impl Rule {
    pub const ALL: [Rule; 4] = [
        Rule::Reset,
        Rule::AssignmentDiscipline,
        Rule::FsmCompleteness,
        Rule::PipelineConsistency,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Reset => "reset",
            Rule::AssignmentDiscipline => "assignment_discipline",
            Rule::FsmCompleteness => "fsm_completeness",
            Rule::PipelineConsistency => "pipeline_consistency",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub verdict: Verdict,
    pub finding: String,
}

/// One outcome per rule, keyed by rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralCheckResult {
    pub outcomes: BTreeMap<Rule, RuleOutcome>,
}

impl StructuralCheckResult {
    pub fn verdict(&self, rule: Rule) -> Verdict {
        self.outcomes
            .get(&rule)
            .map_or(Verdict::NotApplicable, |o| o.verdict)
    }

    pub fn any_fail(&self) -> bool {
        self.outcomes.values().any(|o| o.verdict == Verdict::Fail)
    }

    /// Pass or not-applicable.
    pub fn satisfied(&self, rule: Rule) -> bool {
        self.verdict(rule) != Verdict::Fail
    }

    pub fn findings(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .filter(|(_, o)| o.verdict == Verdict::Fail)
            .map(|(r, o)| format!("{r}: {}", o.finding))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(String),
}

impl Tok {
    fn is(&self, s: &str) -> bool {
        match self {
            Tok::Ident(x) | Tok::Sym(x) | Tok::Num(x) => x == s,
        }
    }

    fn ident(&self) -> Option<&str> {
        match self {
            Tok::Ident(x) => Some(x),
            _ => None,
        }
    }
}

const TWO_CHAR: [&str; 12] = ["<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "::", "+:", "-:", "'{"];

fn lex(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            i += 2;
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            out.push(Tok::Sym("\"\"".into()));
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' || c == '`' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') || i == start {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() || (c == '\'' && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric())) {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if TWO_CHAR.contains(&two.as_str()) {
                out.push(Tok::Sym(two));
                i += 2;
            } else {
                out.push(Tok::Sym(c.to_string()));
                i += 1;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Statement tree

#[derive(Debug, Clone, PartialEq)]
enum Stmt {
    Block(Vec<Stmt>),
    If {
        cond: Vec<Tok>,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    Case {
        selector: Vec<Tok>,
        items: Vec<(Vec<Tok>, Stmt)>,
        has_default: bool,
    },
    Assign {
        targets: Vec<String>,
        blocking: bool,
    },
    Other(Vec<Stmt>),
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

const CASE_KW: [&str; 3] = ["case", "casez", "casex"];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn peek_is(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is(s))
    }

    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Consumes a balanced `( ... )` and returns the inner tokens.
    fn parens(&mut self) -> Vec<Tok> {
        if !self.peek_is("(") {
            return Vec::new();
        }
        self.bump();
        let start = self.pos;
        let mut depth = 1;
        while let Some(t) = self.bump() {
            if t.is("(") {
                depth += 1;
            } else if t.is(")") {
                depth -= 1;
                if depth == 0 {
                    return self.toks[start..self.pos - 1].to_vec();
                }
            }
        }
        self.toks[start..].to_vec()
    }

    fn skip_label(&mut self) {
        if self.peek_is(":") {
            self.bump();
            self.bump();
        }
    }

    fn statement(&mut self) -> Option<Stmt> {
        let t = self.peek()?;
        match t.ident() {
            Some("begin") => {
                self.bump();
                self.skip_label();
                let mut body = Vec::new();
                while let Some(t) = self.peek() {
                    if t.is("end") {
                        self.bump();
                        self.skip_label();
                        break;
                    }
                    match self.statement() {
                        Some(s) => body.push(s),
                        None => break,
                    }
                }
                Some(Stmt::Block(body))
            }
            Some("unique" | "unique0" | "priority") => {
                self.bump();
                self.statement()
            }
            Some("if") => {
                self.bump();
                let cond = self.parens();
                let then = Box::new(self.statement().unwrap_or(Stmt::Other(vec![])));
                let els = if self.peek_is("else") {
                    self.bump();
                    Some(Box::new(self.statement().unwrap_or(Stmt::Other(vec![]))))
                } else {
                    None
                };
                Some(Stmt::If { cond, then, els })
            }
            Some(kw) if CASE_KW.contains(&kw) => {
                self.bump();
                let selector = self.parens();
                if self.peek_is("inside") {
                    self.bump();
                }
                let mut items = Vec::new();
                let mut has_default = false;
                while let Some(t) = self.peek() {
                    if t.is("endcase") {
                        self.bump();
                        break;
                    }
                    let labels = self.case_labels();
                    if labels.len() == 1 && labels[0].is("default") {
                        has_default = true;
                    }
                    let body = self.statement().unwrap_or(Stmt::Other(vec![]));
                    items.push((labels, body));
                }
                Some(Stmt::Case {
                    selector,
                    items,
                    has_default,
                })
            }
            Some("for" | "while" | "repeat" | "forever") => {
                self.bump();
                if !t.is("forever") {
                    self.parens();
                }
                let body = self.statement().unwrap_or(Stmt::Other(vec![]));
                Some(Stmt::Other(vec![body]))
            }
            Some("end" | "endcase" | "endmodule") => None,
            _ => Some(self.simple()),
        }
    }

    /// Tokens up to the `:` that ends a case item label (bracket aware).
    fn case_labels(&mut self) -> Vec<Tok> {
        let start = self.pos;
        let mut depth = 0i32;
        while let Some(t) = self.bump() {
            if t.is("(") || t.is("[") || t.is("{") || t.is("'{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth -= 1;
            } else if t.is(":") && depth == 0 {
                return self.toks[start..self.pos - 1].to_vec();
            } else if t.is("endcase") {
                self.pos -= 1;
                break;
            }
        }
        self.toks[start..self.pos].to_vec()
    }

    /// A simple statement up to `;`. Assignments record their targets.
    fn simple(&mut self) -> Stmt {
        let start = self.pos;
        while let Some(t) = self.bump() {
            if t.is(";") {
                break;
            }
            if t.is("end") || t.is("endcase") {
                self.pos -= 1;
                break;
            }
        }
        let toks = &self.toks[start..self.pos.min(self.toks.len())];
        let mut depth = 0i32;
        for (i, t) in toks.iter().enumerate() {
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth -= 1;
            } else if depth == 0 && (t.is("<=") || t.is("=")) {
                let targets = lhs_targets(&toks[..i]);
                if targets.is_empty() {
                    break;
                }
                return Stmt::Assign {
                    targets,
                    blocking: t.is("="),
                };
            }
        }
        Stmt::Other(vec![])
    }
}

/// Base names written by an assignment left-hand side: `x`, `x[3]`,
/// `{a, b}`.
fn lhs_targets(lhs: &[Tok]) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    for t in lhs {
        if t.is("[") {
            depth += 1;
        } else if t.is("]") {
            depth -= 1;
        } else if depth == 0 {
            if let Some(id) = t.ident() {
                if !out.iter().any(|o| o == id) {
                    out.push(id.to_string());
                }
            }
        }
    }
    out
}

#[derive(Debug)]
struct AlwaysBlock {
    clocked: bool,
    sensitivity: Vec<Tok>,
    body: Stmt,
}

fn always_blocks(toks: &[Tok]) -> Vec<AlwaysBlock> {
    let mut out = Vec::new();
    let mut p = Parser { toks, pos: 0 };
    while let Some(t) = p.bump() {
        let Some(kw) = t.ident() else { continue };
        let clocked_kw = matches!(kw, "always_ff" | "always_latch");
        if !(clocked_kw || matches!(kw, "always" | "always_comb")) {
            continue;
        }
        let mut sensitivity = Vec::new();
        if p.peek_is("@") {
            p.bump();
            if p.peek_is("(") {
                sensitivity = p.parens();
            } else {
                p.bump();
            }
        }
        let edge = sensitivity.iter().any(|t| t.is("posedge") || t.is("negedge"));
        if let Some(body) = p.statement() {
            out.push(AlwaysBlock {
                clocked: clocked_kw || edge,
                sensitivity,
                body,
            });
        }
    }
    out
}

fn walk<'s>(stmt: &'s Stmt, f: &mut dyn FnMut(&'s Stmt)) {
    f(stmt);
    match stmt {
        Stmt::Block(v) | Stmt::Other(v) => v.iter().for_each(|s| walk(s, f)),
        Stmt::If { then, els, .. } => {
            walk(then, f);
            if let Some(e) = els {
                walk(e, f);
            }
        }
        Stmt::Case { items, .. } => items.iter().for_each(|(_, s)| walk(s, f)),
        Stmt::Assign { .. } => {}
    }
}

fn assigned(stmt: &Stmt) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk(stmt, &mut |s| {
        if let Stmt::Assign { targets, .. } = s {
            out.extend(targets.iter().cloned());
        }
    });
    out
}

/// True if every control path through `stmt` assigns `name`.
fn assigns_on_all_paths(stmt: &Stmt, name: &str) -> bool {
    match stmt {
        Stmt::Assign { targets, .. } => targets.iter().any(|t| t == name),
        Stmt::Block(v) => v.iter().any(|s| assigns_on_all_paths(s, name)),
        Stmt::If { then, els, .. } => {
            assigns_on_all_paths(then, name)
                && els.as_ref().is_some_and(|e| assigns_on_all_paths(e, name))
        }
        Stmt::Case {
            items, has_default, ..
        } => *has_default && items.iter().all(|(_, s)| assigns_on_all_paths(s, name)),
        Stmt::Other(_) => false,
    }
}

fn is_reset_name(id: &str) -> bool {
    let l = id.to_ascii_lowercase();
    l.contains("rst") || l.contains("reset")
}

fn mentions_reset(toks: &[Tok]) -> bool {
    toks.iter().any(|t| t.ident().is_some_and(is_reset_name))
}

/// Top-level statements of a block body.
fn top_level(stmt: &Stmt) -> Vec<&Stmt> {
    match stmt {
        Stmt::Block(v) => v.iter().collect(),
        s => vec![s],
    }
}

/// The first top-level `if` whose condition mentions a reset, split into
/// (reset branch, remaining logic).
fn reset_split(body: &Stmt) -> Option<(&Stmt, Option<&Stmt>)> {
    top_level(body).into_iter().find_map(|s| match s {
        Stmt::If { cond, then, els } if mentions_reset(cond) => Some((then.as_ref(), els.as_deref())),
        _ => None,
    })
}

fn outcome(verdict: Verdict, finding: impl Into<String>) -> RuleOutcome {
    RuleOutcome {
        verdict,
        finding: finding.into(),
    }
}

fn check_reset(blocks: &[AlwaysBlock]) -> RuleOutcome {
    let clocked: Vec<_> = blocks.iter().filter(|b| b.clocked).collect();
    if clocked.is_empty() {
        return outcome(Verdict::NotApplicable, "no clocked blocks");
    }
    for (i, b) in clocked.iter().enumerate() {
        let Some((reset_branch, _)) = reset_split(&b.body) else {
            return outcome(Verdict::Fail, format!("clocked block {i} has no reset branch"));
        };
        let all = assigned(&b.body);
        let under_reset = assigned(reset_branch);
        let missing: Vec<_> = all.difference(&under_reset).cloned().collect();
        if !missing.is_empty() {
            return outcome(
                Verdict::Fail,
                format!("registers not reset in clocked block {i}: {}", missing.join(", ")),
            );
        }
    }
    let _ = clocked.iter().map(|b| mentions_reset(&b.sensitivity));
    outcome(Verdict::Pass, format!("{} clocked block(s) reset all registers", clocked.len()))
}

fn check_assignment_discipline(blocks: &[AlwaysBlock]) -> RuleOutcome {
    if blocks.is_empty() {
        return outcome(Verdict::NotApplicable, "no always blocks");
    }
    let mut owner: BTreeMap<String, usize> = BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        for name in assigned(&b.body) {
            if let Some(prev) = owner.insert(name.clone(), i) {
                if prev != i {
                    return outcome(
                        Verdict::Fail,
                        format!("`{name}` is assigned in always blocks {prev} and {i}"),
                    );
                }
            }
        }
        if b.clocked {
            let mut blocking = None;
            walk(&b.body, &mut |s| {
                if let Stmt::Assign {
                    targets,
                    blocking: true,
                } = s
                {
                    blocking.get_or_insert_with(|| targets[0].clone());
                }
            });
            if let Some(name) = blocking {
                return outcome(
                    Verdict::Fail,
                    format!("blocking assignment to `{name}` in clocked block {i}"),
                );
            }
        }
    }
    outcome(Verdict::Pass, "single driver per signal; nonblocking in clocked blocks")
}

/// Members of `typedef enum ... { A, B = 2, C } name;` keyed by type name.
fn enum_types(toks: &[Tok]) -> BTreeMap<String, Vec<String>> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i + 1 < toks.len() {
        if toks[i].is("typedef") && toks[i + 1].is("enum") {
            let Some(open) = toks[i..].iter().position(|t| t.is("{")).map(|o| i + o) else {
                break;
            };
            let Some(close) = toks[open..].iter().position(|t| t.is("}")).map(|o| open + o) else {
                break;
            };
            let mut members = Vec::new();
            let mut expect_name = true;
            for t in &toks[open + 1..close] {
                if t.is(",") {
                    expect_name = true;
                } else if expect_name {
                    if let Some(id) = t.ident() {
                        members.push(id.to_string());
                    }
                    expect_name = false;
                }
            }
            if let Some(name) = toks.get(close + 1).and_then(Tok::ident) {
                out.insert(name.to_string(), members);
            }
            i = close + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Variable name to enum type for declarations `type_name var[, var];`.
fn enum_vars(toks: &[Tok], enums: &BTreeMap<String, Vec<String>>) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (i, t) in toks.iter().enumerate() {
        let Some(ty) = t.ident().filter(|id| enums.contains_key(*id)) else {
            continue;
        };
        if i > 0 && toks[i - 1].is("}") {
            continue;
        }
        let mut j = i + 1;
        while let Some(v) = toks.get(j).and_then(Tok::ident) {
            out.insert(v.to_string(), ty.to_string());
            if toks.get(j + 1).is_some_and(|t| t.is(",")) {
                j += 2;
            } else {
                break;
            }
        }
    }
    out
}

fn check_fsm(toks: &[Tok], blocks: &[AlwaysBlock]) -> RuleOutcome {
    let enums = enum_types(toks);
    let vars = enum_vars(toks, &enums);
    let mut cases = 0;
    let mut failure = None;
    for b in blocks {
        walk(&b.body, &mut |s| {
            let Stmt::Case {
                selector,
                items,
                has_default,
            } = s
            else {
                return;
            };
            cases += 1;
            if *has_default || failure.is_some() {
                return;
            }
            let full = match selector.as_slice() {
                [Tok::Ident(sel)] => vars.get(sel).is_some_and(|ty| {
                    let labels: BTreeSet<&str> = items
                        .iter()
                        .flat_map(|(l, _)| l.iter().filter_map(Tok::ident))
                        .collect();
                    enums[ty].iter().all(|m| labels.contains(m.as_str()))
                }),
                _ => false,
            };
            if !full {
                let sel: Vec<String> = selector
                    .iter()
                    .map(|t| match t {
                        Tok::Ident(x) | Tok::Num(x) | Tok::Sym(x) => x.clone(),
                    })
                    .collect();
                failure = Some(format!("Missing default case in case ({})", sel.join("")));
            }
        });
    }
    match (cases, failure) {
        (0, _) => outcome(Verdict::NotApplicable, "no case statements"),
        (_, Some(f)) => outcome(Verdict::Fail, f),
        (n, None) => outcome(Verdict::Pass, format!("{n} case statement(s) complete")),
    }
}

fn is_stage_name(id: &str) -> bool {
    let l = id.to_ascii_lowercase();
    if l.contains("stage") || l.contains("stg") || l.contains("pipe") {
        return true;
    }
    // Suffixes like `_s1`, `_d2`, `_q0`, `_r3`.
    match l.rsplit_once('_') {
        Some((_, suf)) => {
            suf.len() >= 2
                && matches!(suf.as_bytes()[0], b's' | b'd' | b'q' | b'r')
                && suf[1..].bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

fn check_pipeline(blocks: &[AlwaysBlock]) -> RuleOutcome {
    let mut stages = 0;
    for (i, b) in blocks.iter().filter(|b| b.clocked).enumerate() {
        let regs: Vec<String> = assigned(&b.body).into_iter().filter(|r| is_stage_name(r)).collect();
        if regs.is_empty() {
            continue;
        }
        stages += regs.len();
        let logic = match reset_split(&b.body) {
            Some((_, rest)) => rest,
            None => Some(&b.body),
        };
        for r in &regs {
            if !logic.is_some_and(|l| assigns_on_all_paths(l, r)) {
                return outcome(
                    Verdict::Fail,
                    format!("stage register `{r}` is not assigned on every path of clocked block {i}"),
                );
            }
        }
    }
    if stages == 0 {
        outcome(Verdict::NotApplicable, "no pipeline stage registers")
    } else {
        outcome(Verdict::Pass, format!("{stages} stage register(s) updated every cycle"))
    }
}

/// Applies the enabled rules. Disabled rules report `NotApplicable`.
pub fn structural_check(source: &str, rules: &[Rule]) -> StructuralCheckResult {
    let toks = lex(source);
    let blocks = always_blocks(&toks);
    let outcomes = Rule::ALL
        .into_iter()
        .map(|rule| {
            let o = if !rules.contains(&rule) {
                outcome(Verdict::NotApplicable, "rule disabled")
            } else {
                match rule {
                    Rule::Reset => check_reset(&blocks),
                    Rule::AssignmentDiscipline => check_assignment_discipline(&blocks),
                    Rule::FsmCompleteness => check_fsm(&toks, &blocks),
                    Rule::PipelineConsistency => check_pipeline(&blocks),
                }
            };
            (rule, o)
        })
        .collect();
    StructuralCheckResult { outcomes }
}

/// Cheap well-formedness probe: a `module`, and balanced
/// `module`/`endmodule`, `begin`/`end`, `case`/`endcase`, and brackets.
pub fn lexically_balanced(source: &str) -> bool {
    let toks = lex(source);
    let mut module = 0i32;
    let mut block = 0i32;
    let mut case = 0i32;
    let mut bracket = 0i32;
    for t in &toks {
        match t {
            Tok::Ident(id) => match id.as_str() {
                "module" | "macromodule" => module += 1,
                "endmodule" => module -= 1,
                "begin" => block += 1,
                "end" => block -= 1,
                "endcase" => case -= 1,
                kw if CASE_KW.contains(&kw) => case += 1,
                _ => {}
            },
            Tok::Sym(s) => match s.as_str() {
                "(" | "[" | "{" | "'{" => bracket += 1,
                ")" | "]" | "}" => bracket -= 1,
                _ => {}
            },
            Tok::Num(_) => {}
        }
        if module < 0 || block < 0 || case < 0 || bracket < 0 {
            return false;
        }
    }
    let has_module = toks.iter().any(|t| t.is("module") || t.is("macromodule"));
    has_module && module == 0 && block == 0 && case == 0 && bracket == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unterminated_constructs_do_not_panic() {
        for src in [
            "module m; always @(*) begin case (op) 3'b000: y = a; endcas end endmodule",
            "module m; always @(posedge clk) case (s",
            "always @(posedge clk) begin if (",
            "always",
        ] {
            let _ = structural_check(src, &Rule::ALL);
        }
    }

    const FREQ_DIV: &str = r#"module freq_div #(parameter DIV = 100)(
  input  logic clk,
  input  logic rst_n,
  output logic clk_out
);
  logic [$clog2(DIV)-1:0] cnt;

  always_ff @(posedge clk) begin
    if (!rst_n) begin
      cnt <= '0;              // Proper reset
      clk_out <= 1'b0;        // Deterministic initialization
    end else if (cnt == DIV-1) begin
      cnt <= '0;
      clk_out <= ~clk_out;    // Controlled toggle
    end else begin
      cnt <= cnt + 1'b1;
    end
  end
endmodule
"#;

    const TRAFFIC_FRAGMENT: &str = r#"always_ff @(posedge clk) begin
  if (rst) begin
    state <= RED;
  end else begin
    case (state)
      RED:    if (timer == 0) state <= GREEN;
      GREEN:  if (timer == 0) state <= YELLOW;
      YELLOW: if (timer == 0) state <= RED;
      // Missing default case
    endcase
    // Missing timer reset / update
  end
end
"#;

    #[test]
    fn freq_div_listing() {
        let r = structural_check(FREQ_DIV, &Rule::ALL);
        assert_eq!(r.verdict(Rule::Reset), Verdict::Pass);
        assert_eq!(r.verdict(Rule::FsmCompleteness), Verdict::NotApplicable);
        assert_eq!(r.verdict(Rule::AssignmentDiscipline), Verdict::Pass);
        assert_eq!(r.verdict(Rule::PipelineConsistency), Verdict::NotApplicable);
        assert!(!r.any_fail());
    }

    #[test]
    fn traffic_light_fragment() {
        let r = structural_check(TRAFFIC_FRAGMENT, &Rule::ALL);
        assert_eq!(r.verdict(Rule::FsmCompleteness), Verdict::Fail);
        assert!(r.outcomes[&Rule::FsmCompleteness]
            .finding
            .contains("Missing default case"));
        assert_eq!(r.verdict(Rule::Reset), Verdict::Pass);
    }

    #[test]
    fn empty_rule_set() {
        let r = structural_check(FREQ_DIV, &[]);
        assert_eq!(r.outcomes.len(), 4);
        assert!(r.outcomes.values().all(|o| o.verdict == Verdict::NotApplicable));
    }

    #[test]
    fn unreset_register_fails() {
        let src = "always_ff @(posedge clk) begin if (rst) a <= 0; else begin a <= b; c <= a; end end";
        let r = structural_check(src, &[Rule::Reset]);
        assert_eq!(r.verdict(Rule::Reset), Verdict::Fail);
        assert!(r.outcomes[&Rule::Reset].finding.contains('c'));
    }

    #[test]
    fn missing_reset_branch_fails() {
        let src = "always @(posedge clk) q <= d;";
        let r = structural_check(src, &[Rule::Reset]);
        assert_eq!(r.verdict(Rule::Reset), Verdict::Fail);
    }

    #[test]
    fn enum_full_enumeration_passes() {
        let src = r#"
typedef enum logic [1:0] {RED, GREEN, YELLOW} state_t;
state_t state;
always_ff @(posedge clk) begin
  if (rst) state <= RED;
  else case (state)
    RED: state <= GREEN;
    GREEN: state <= YELLOW;
    YELLOW: state <= RED;
  endcase
end"#;
        let r = structural_check(src, &[Rule::FsmCompleteness]);
        assert_eq!(r.verdict(Rule::FsmCompleteness), Verdict::Pass);
    }

    #[test]
    fn multiple_drivers_fail() {
        let src = "always_ff @(posedge clk) if (rst) a <= 0; else a <= 1;\n\
                   always_ff @(posedge clk) if (rst) a <= 0; else a <= 2;";
        let r = structural_check(src, &[Rule::AssignmentDiscipline]);
        assert_eq!(r.verdict(Rule::AssignmentDiscipline), Verdict::Fail);
    }

    #[test]
    fn blocking_in_clocked_block_fails() {
        let src = "always_ff @(posedge clk) begin if (rst) q <= 0; else q = d; end";
        let r = structural_check(src, &[Rule::AssignmentDiscipline]);
        assert_eq!(r.verdict(Rule::AssignmentDiscipline), Verdict::Fail);
        let comb = "always_comb begin y = a & b; end";
        let r = structural_check(comb, &[Rule::AssignmentDiscipline]);
        assert_eq!(r.verdict(Rule::AssignmentDiscipline), Verdict::Pass);
    }

    #[test]
    fn stage_registers() {
        let ok = "always_ff @(posedge clk) begin if (rst) begin data_s1 <= 0; data_s2 <= 0; end \
                  else begin data_s1 <= din; data_s2 <= data_s1; end end";
        let r = structural_check(ok, &[Rule::PipelineConsistency]);
        assert_eq!(r.verdict(Rule::PipelineConsistency), Verdict::Pass);
        let bad = "always_ff @(posedge clk) begin if (rst) begin data_s1 <= 0; data_s2 <= 0; end \
                   else begin data_s1 <= din; if (en) data_s2 <= data_s1; end end";
        let r = structural_check(bad, &[Rule::PipelineConsistency]);
        assert_eq!(r.verdict(Rule::PipelineConsistency), Verdict::Fail);
        assert!(r.outcomes[&Rule::PipelineConsistency].finding.contains("data_s2"));
    }

    #[test]
    fn balance_probe() {
        assert!(lexically_balanced(FREQ_DIV));
        assert!(!lexically_balanced("module m; always begin end end endmodule"));
        assert!(!lexically_balanced("module m; case (x) endmodule"));
        assert!(!lexically_balanced("// no module here"));
    }

    #[test]
    fn comments_and_strings_ignored() {
        let src = "// case (x) endcase\n/* always_ff @(posedge clk) q = d; */\ninitial $display(\"case\");";
        let r = structural_check(src, &Rule::ALL);
        assert!(r.outcomes.values().all(|o| o.verdict == Verdict::NotApplicable));
    }
}
