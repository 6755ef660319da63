//! Machine-readable reports for the CLI. The JSON schema is versioned;
//! identical inputs and flags produce byte-identical reports except for
//! the timing field.

use crate::equivalence::Verdict;
use crate::machine::{BlockedClass, RunOutcome, TraceEntry};
use crate::surface::{DeclKind, DeclStatus, Diagnostic, Module};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct DeclReport {
    pub name: String,
    pub kind: DeclKind,
    pub status: DeclStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub main: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stack_var: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocked: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Serialize)]
pub struct EquivReport {
    pub lhs: String,
    pub rhs: String,
    pub verdict: Verdict,
}

#[derive(Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub status: String,
    pub declarations: Vec<DeclReport>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equiv: Option<EquivReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            status: "ok".to_string(),
            declarations: Vec::new(),
            diagnostics: Vec::new(),
            run: None,
            equiv: None,
            elapsed_ms: None,
        }
    }

    pub fn from_module(command: &str, module: &Module, emit_derivations: bool) -> Report {
        let mut r = Report::new(command);
        r.diagnostics = module.diagnostics.clone();
        for d in &module.decls {
            r.declarations.push(DeclReport {
                name: d.name.clone(),
                kind: d.kind,
                status: d.status,
                detail: d.detail.clone(),
                derivation: if emit_derivations {
                    d.derivation.as_ref().map(|x| x.to_json())
                } else {
                    None
                },
                verdict: d.verdict.clone(),
            });
        }
        if module.failed() {
            r.status = "failed".to_string();
        }
        r
    }

    pub fn set_run(&mut self, main: &str, outcome: &RunOutcome, trace: Option<Vec<TraceEntry>>) {
        let rr = match outcome {
            RunOutcome::Converged { value, stack_var, steps } => RunReport {
                main: main.to_string(),
                outcome: "converged".into(),
                value: Some(value.to_string()),
                stack_var: Some(stack_var.to_string()),
                steps: Some(*steps),
                blocked: None,
                trace,
            },
            RunOutcome::Halted { class, steps } => {
                self.status = "failed".into();
                RunReport {
                    main: main.to_string(),
                    outcome: "halted".into(),
                    value: None,
                    stack_var: None,
                    steps: Some(*steps),
                    blocked: Some(class.describe()),
                    trace,
                }
            }
            RunOutcome::OutOfFuel { last } => {
                if self.status == "ok" {
                    self.status = "out-of-fuel".into();
                }
                RunReport {
                    main: main.to_string(),
                    outcome: "out-of-fuel".into(),
                    value: None,
                    stack_var: None,
                    steps: None,
                    blocked: Some(format!("last state: {last}")),
                    trace,
                }
            }
        };
        self.run = Some(rr);
    }

    /// Exit status: 0 when everything is ok (totality assumptions and
    /// fuel exhaustion included), 1 on any failure; usage errors exit 2
    /// before a report exists.
    pub fn exit_code(&self) -> i32 {
        if self.status == "failed" {
            1
        } else {
            0
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&format!("error: {}\n", d.render()));
        }
        for d in &self.declarations {
            let status = match d.status {
                DeclStatus::Ok => "ok",
                DeclStatus::AssumesTotality => "ok [assumes-totality]",
                DeclStatus::Failed => "FAILED",
            };
            out.push_str(&format!("{:<9} {:<24} {}\n", format!("{:?}", d.kind).to_lowercase(), d.name, status));
            if let Some(detail) = &d.detail {
                for line in detail.lines() {
                    out.push_str(&format!("    {line}\n"));
                }
            }
            if let Some(v) = &d.verdict {
                if matches!(v, Verdict::Refuted { .. }) {
                    out.push_str(&format!(
                        "    certificate: {}\n",
                        serde_json::to_string(v).unwrap_or_default()
                    ));
                }
            }
        }
        if let Some(run) = &self.run {
            match run.outcome.as_str() {
                "converged" => out.push_str(&format!(
                    "{} ⇓ {} ∗ {}   ({} steps)\n",
                    run.main,
                    run.value.as_deref().unwrap_or("?"),
                    run.stack_var.as_deref().unwrap_or("?"),
                    run.steps.unwrap_or(0)
                )),
                "halted" => out.push_str(&format!(
                    "{} blocked: {}   ({} steps)\n",
                    run.main,
                    run.blocked.as_deref().unwrap_or("?"),
                    run.steps.unwrap_or(0)
                )),
                _ => out.push_str(&format!(
                    "{} did not finish within the fuel budget\n",
                    run.main
                )),
            }
        }
        if let Some(eq) = &self.equiv {
            let verdict = match &eq.verdict {
                Verdict::Proved { .. } => "proved",
                Verdict::Refuted { .. } => "refuted",
                Verdict::Unknown => "unknown",
            };
            out.push_str(&format!("{} ≡ {} : {}\n", eq.lhs, eq.rhs, verdict));
            if let Some(cert) = eq.verdict.certificate() {
                out.push_str(&format!(
                    "certificate: {}\n",
                    serde_json::to_string(cert).unwrap_or_default()
                ));
            }
        }
        out.push_str(&format!("status: {}\n", self.status));
        out
    }
}

/// Blocked classes that make `run` exit nonzero.
pub fn run_is_failure(outcome: &RunOutcome) -> bool {
    matches!(
        outcome,
        RunOutcome::Halted { class, .. }
            if !matches!(class, BlockedClass::Final(..))
    )
}
