//! Command-line front door: check files, run programs, query term
//! equivalence.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use svr_core::equivalence::{decide, Budget, Polarity};
use svr_core::machine::{run, trace_with_rules, NullOracle};
use svr_core::report::{EquivReport, Report};
use svr_core::surface::{
    desugar_expr_in_scope, elaborate_module, link_definition, parse_expr_snippet,
};
use svr_core::syntax::{free_vars_term, fresh, Name, Process, Stack};
use svr_core::types::restrict_to_equational;

#[derive(Parser)]
#[command(name = "svr", version, about = "Checker and interpreter for .svr modules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct BudgetArgs {
    /// Machine fuel (also bounds rewriting); SVR_BUDGET overrides the
    /// default, the flag overrides both.
    #[arg(long)]
    budget: Option<u64>,
    /// Maximum stack-context depth of the counterexample search.
    #[arg(long)]
    search_depth: Option<usize>,
    /// Maximum size of substituted values in the search.
    #[arg(long)]
    subst_size: Option<usize>,
    /// Stratification depth for the δ oracle.
    #[arg(long)]
    delta_index: Option<usize>,
}

impl BudgetArgs {
    fn resolve(&self) -> Budget {
        let mut b = Budget::default();
        if let Ok(v) = std::env::var("SVR_BUDGET") {
            if let Ok(n) = v.parse() {
                b.machine_fuel = n;
            }
        }
        if let Some(n) = self.budget {
            b.machine_fuel = n;
        }
        if let Some(n) = self.search_depth {
            b.search_depth = n;
        }
        if let Some(n) = self.subst_size {
            b.subst_size = n;
        }
        if let Some(n) = self.delta_index {
            b.delta_index = n;
        }
        b
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every declaration of a module.
    Check {
        path: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        /// Include derivation trees in the report.
        #[arg(long)]
        emit_derivations: bool,
    },
    /// Run a definition on the abstract machine.
    Run {
        path: PathBuf,
        /// Name of the definition to run.
        #[arg(long)]
        main: String,
        /// Step budget.
        #[arg(long)]
        fuel: Option<u64>,
        /// Print the machine states.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Decide an equivalence between two expressions in a module's scope.
    Equiv {
        path: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
}

fn read_file(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("svr: cannot read {}: {e}", path.display());
        // usage error
        ExitCode::from(2)
    })
}

fn finish(mut report: Report, json: bool, started: Instant) -> ExitCode {
    report.elapsed_ms = Some(started.elapsed().as_millis());
    if json {
        println!("{}", report.to_json_string());
    } else {
        print!("{}", report.render_text());
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.cmd {
        Cmd::Check { path, budget, json, emit_derivations } => {
            let src = match read_file(&path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let module = elaborate_module(&src, &budget.resolve());
            let report = Report::from_module("check", &module, emit_derivations);
            finish(report, json, started)
        }
        Cmd::Run { path, main, fuel, trace, json } => {
            let src = match read_file(&path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let budget = Budget::default();
            let module = elaborate_module(&src, &budget);
            let mut report = Report::from_module("run", &module, false);
            let linked = match link_definition(&module, &Name::new(&main)) {
                Ok(t) => t,
                Err(e) => {
                    report.status = "failed".into();
                    report.diagnostics.push(svr_core::surface::Diagnostic {
                        severity: svr_core::surface::Severity::Error,
                        line: 0,
                        column: 0,
                        start: 0,
                        end: 0,
                        message: e,
                    });
                    return finish(report, json, started);
                }
            };
            let fv = free_vars_term(&linked);
            if !fv.is_empty() {
                report.status = "failed".into();
                report.diagnostics.push(svr_core::surface::Diagnostic {
                    severity: svr_core::surface::Severity::Error,
                    line: 0,
                    column: 0,
                    start: 0,
                    end: 0,
                    message: format!("`{main}` is not closed"),
                });
                return finish(report, json, started);
            }
            let fuel = fuel
                .or_else(|| std::env::var("SVR_BUDGET").ok().and_then(|v| v.parse().ok()))
                .unwrap_or(100_000);
            let process = Process::new(linked, Stack::Var(fresh(&Name::new("α"))));
            let outcome = run(&process, fuel, &NullOracle);
            let trace_entries = trace.then(|| {
                let steps = trace_with_rules(&process, fuel, &NullOracle);
                if !json {
                    print!("{}", svr_core::machine::trace_text(&steps));
                }
                svr_core::machine::trace_json(&steps)
            });
            report.set_run(&main, &outcome, trace_entries);
            finish(report, json, started)
        }
        Cmd::Equiv { path, lhs, rhs, budget, json } => {
            let src = match read_file(&path) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let budget = budget.resolve();
            let module = elaborate_module(&src, &budget);
            let mut report = Report::from_module("equiv", &module, false);
            let parse_side = |text: &String, report: &mut Report| {
                match parse_expr_snippet(text) {
                    Ok(e) => match desugar_expr_in_scope(text, &module, &e) {
                        Ok(t) => Some(t),
                        Err(diags) => {
                            report.status = "failed".into();
                            report.diagnostics.extend(diags);
                            None
                        }
                    },
                    Err(d) => {
                        report.status = "failed".into();
                        report.diagnostics.push(d);
                        None
                    }
                }
            };
            let (Some(l), Some(r)) = (parse_side(&lhs, &mut report), parse_side(&rhs, &mut report))
            else {
                return finish(report, json, started);
            };
            let e = restrict_to_equational(&module.ctx);
            let mut verdict = decide(&e, &l, &r, Polarity::Equiv, &budget);
            // the bounded counterexample search can still refute a claim
            // the equational procedure cannot decide
            if verdict.is_unknown() {
                if let Some(w) = svr_core::equivalence::search_inequivalence(&l, &r, &budget) {
                    if w.sound {
                        verdict = svr_core::equivalence::Verdict::Refuted {
                            certificate: Box::new(
                                svr_core::equivalence::Certificate::Witness(w),
                            ),
                        };
                    }
                }
            }
            if report.status == "ok" {
                report.status = match &verdict {
                    svr_core::equivalence::Verdict::Proved { .. } => "proved".into(),
                    svr_core::equivalence::Verdict::Refuted { .. } => "refuted".into(),
                    svr_core::equivalence::Verdict::Unknown => "unknown".into(),
                };
            }
            report.equiv = Some(EquivReport {
                lhs: l.to_string(),
                rhs: r.to_string(),
                verdict,
            });
            finish(report, json, started)
        }
    }
}
