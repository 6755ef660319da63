//! The call-by-value stack machine. A state is a process `t ∗ π`; one of
//! nine rules applies, or the state is blocked and gets classified.
//!
//! Evaluation is right-to-left call-by-value: an application pushes the
//! function into a stack frame and evaluates its argument first.

use crate::syntax::{subst_term, Binding, Name, Process, Stack, Term, Value};
use serde::Serialize;

/// Answer of an equivalence oracle for the δ instruction. δ steps only
/// when its two values are *known* inequivalent; anything less keeps the
/// state blocked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    DefinitelyInequivalent,
    NotKnownInequivalent,
}

/// Oracle interface consumed by the machine. Answers must be stable
/// across repeated queries on alpha-equal inputs.
pub trait EquivOracle {
    fn query(&self, left: &Value, right: &Value) -> OracleAnswer;
}

/// Oracle that never fires a δ. Adequate for user programs, which are
/// δ-free by construction.
pub struct NullOracle;

impl EquivOracle for NullOracle {
    fn query(&self, _: &Value, _: &Value) -> OracleAnswer {
        OracleAnswer::NotKnownInequivalent
    }
}

/// The eight irrecoverably-wrong shapes, plus two for the internal value
/// extensions (`unit_v` applied to a non-empty-record argument, and the
/// internal values in scrutinee position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StuckForm {
    /// `C[v].l ∗ π`
    CtorProjected,
    /// `(λx t).l ∗ π`
    LambdaProjected,
    /// `C[v] ∗ w.π`
    CtorApplied,
    /// `{…} ∗ w.π`
    RecordApplied,
    /// `case (λx t) {…} ∗ π`
    CaseOnLambda,
    /// `case {…} {…} ∗ π`
    CaseOnRecord,
    /// `case C_k[v] {…} ∗ π` with no branch for `C_k`
    MissingBranch,
    /// `{l_i = v_i}.l_k ∗ π` with no field `l_k`
    MissingField,
    /// `unit_v ∗ π` with `v ≠ {}`
    UnitProbeArg,
    /// projection or case on `unit_v` (internal values are opaque data)
    InternalScrutinee,
}

/// Why a process cannot take a step: a value facing a bare stack
/// variable, an irrecoverably wrong shape, a δ awaiting an equivalence
/// fact, an open variable in head position, or the failing value ✂.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockedClass {
    /// `v ∗ α` — a successful computation.
    Final(Value, Name),
    /// One of the wrong shapes; no substitution can ever unblock it.
    Stuck(StuckForm),
    /// `δ(v, w) ∗ π` with the oracle unable to rule the values apart.
    DeltaLike(Value, Value, Stack),
    /// An open lambda-variable in head position: `x.l ∗ π`, `x ∗ v.π`
    /// or `case x {…} ∗ π`.
    OpenLambdaVar(OpenForm),
    /// `a ∗ π` — an open term variable facing a stack.
    OpenTermVar(Stack),
    /// The machine reached ✂ and fails.
    ScissorsHit,
}

/// The blocked shapes with a lambda-variable in head position: `x.l ∗ π`,
/// `x ∗ v.π`, `case x {…} ∗ π`, and `unit_x ∗ π` from the probe
/// extension (substituting the empty record for `x` unblocks it).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpenForm {
    Projected,
    Applied,
    Cased,
    UnitArg,
}

/// Result of one machine step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Next(Process),
    Blocked(BlockedClass),
}

/// Which reduction rule fired; used by traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `t u ∗ π ≻ u ∗ [t]π`
    App,
    /// `v ∗ [t]π ≻ t ∗ v.π`
    Frame,
    /// `λx t ∗ v.π ≻ t[x := v] ∗ π`
    Beta,
    /// `μα t ∗ π ≻ t[α := π] ∗ π`
    Mu,
    /// `p ∗ π ≻ p`
    Restart,
    /// `{l_i = v_i}.l_k ∗ π ≻ v_k ∗ π`
    Proj,
    /// `case C_k[v] {…} ∗ π ≻ t_k[x_k := v] ∗ π`
    Case,
    /// `δ(v, w) ∗ π ≻ v ∗ π` when v, w known inequivalent
    Delta,
    /// `unit_{} ∗ π ≻ {} ∗ π`
    Unit,
}

/// A value the machine may treat as data: everything except the two
/// internal/erroneous values.
fn proper_value(v: &Value) -> bool {
    !matches!(v, Value::Scissors | Value::UnitProbe(_))
}

/// One step of reduction, or the classification of the blocked state.
/// Exactly one rule applies to any given process.
pub fn step(p: &Process, oracle: &dyn EquivOracle) -> StepResult {
    match step_with_rule(p, oracle) {
        Ok((q, _)) => StepResult::Next(q),
        Err(class) => StepResult::Blocked(class),
    }
}

/// Like [`step`] but also reports which rule fired.
pub fn step_with_rule(p: &Process, oracle: &dyn EquivOracle) -> Result<(Process, Rule), BlockedClass> {
    let stack = &p.stack;
    match &p.term {
        Term::App(t, u) => Ok((
            Process::new(
                (**u).clone(),
                Stack::Frame(t.clone(), Box::new(stack.clone())),
            ),
            Rule::App,
        )),
        Term::Mu(a, t) => {
            let body = subst_term(t, Binding::MuVar(a.clone(), stack.clone()));
            Ok((Process::new(body, stack.clone()), Rule::Mu))
        }
        Term::Proc(q) => Ok(((**q).clone(), Rule::Restart)),
        Term::Proj(v, l) => match &**v {
            Value::Record(fs) => match fs.get(l) {
                Some(field) => Ok((
                    Process::new(Term::Val(field.clone()), stack.clone()),
                    Rule::Proj,
                )),
                None => Err(BlockedClass::Stuck(StuckForm::MissingField)),
            },
            Value::Ctor(..) => Err(BlockedClass::Stuck(StuckForm::CtorProjected)),
            Value::Lam(..) => Err(BlockedClass::Stuck(StuckForm::LambdaProjected)),
            Value::Var(_) => Err(BlockedClass::OpenLambdaVar(OpenForm::Projected)),
            Value::Scissors => Err(BlockedClass::ScissorsHit),
            Value::UnitProbe(_) => Err(BlockedClass::Stuck(StuckForm::InternalScrutinee)),
        },
        Term::Case(v, branches) => match &**v {
            Value::Ctor(c, payload) => match branches.get(c) {
                Some((x, body)) => {
                    let body = subst_term(body, Binding::LambdaVar(x.clone(), (**payload).clone()));
                    Ok((Process::new(body, stack.clone()), Rule::Case))
                }
                None => Err(BlockedClass::Stuck(StuckForm::MissingBranch)),
            },
            Value::Lam(..) => Err(BlockedClass::Stuck(StuckForm::CaseOnLambda)),
            Value::Record(_) => Err(BlockedClass::Stuck(StuckForm::CaseOnRecord)),
            Value::Var(_) => Err(BlockedClass::OpenLambdaVar(OpenForm::Cased)),
            Value::Scissors => Err(BlockedClass::ScissorsHit),
            Value::UnitProbe(_) => Err(BlockedClass::Stuck(StuckForm::InternalScrutinee)),
        },
        Term::Delta(v, w) => match oracle.query(v, w) {
            OracleAnswer::DefinitelyInequivalent => Ok((
                Process::new(Term::Val((**v).clone()), stack.clone()),
                Rule::Delta,
            )),
            OracleAnswer::NotKnownInequivalent => Err(BlockedClass::DeltaLike(
                (**v).clone(),
                (**w).clone(),
                stack.clone(),
            )),
        },
        Term::TermVar(_) => Err(BlockedClass::OpenTermVar(stack.clone())),
        Term::Val(Value::Scissors) => Err(BlockedClass::ScissorsHit),
        Term::Val(Value::UnitProbe(v)) => {
            if v.is_unit() {
                Ok((
                    Process::new(Term::Val(Value::unit()), stack.clone()),
                    Rule::Unit,
                ))
            } else if matches!(&**v, Value::Var(_)) {
                // a variable argument may still become the empty record
                Err(BlockedClass::OpenLambdaVar(OpenForm::UnitArg))
            } else {
                Err(BlockedClass::Stuck(StuckForm::UnitProbeArg))
            }
        }
        Term::Val(v) => {
            debug_assert!(proper_value(v));
            match stack {
                Stack::Var(a) => Err(BlockedClass::Final(v.clone(), a.clone())),
                Stack::Frame(t, rest) => Ok((
                    Process::new(
                        (**t).clone(),
                        Stack::Push(Box::new(v.clone()), rest.clone()),
                    ),
                    Rule::Frame,
                )),
                Stack::Push(w, rest) => match v {
                    Value::Lam(x, body) => {
                        let body =
                            subst_term(body, Binding::LambdaVar(x.clone(), (**w).clone()));
                        Ok((Process::new(body, (**rest).clone()), Rule::Beta))
                    }
                    Value::Ctor(..) => Err(BlockedClass::Stuck(StuckForm::CtorApplied)),
                    Value::Record(_) => Err(BlockedClass::Stuck(StuckForm::RecordApplied)),
                    Value::Var(_) => Err(BlockedClass::OpenLambdaVar(OpenForm::Applied)),
                    Value::Scissors | Value::UnitProbe(_) => unreachable!(),
                },
            }
        }
    }
}

/// Outcome of running the machine with a step budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    /// A final state `v ∗ α` was reached.
    Converged {
        value: Value,
        stack_var: Name,
        steps: u64,
    },
    /// A non-final blocked state was reached.
    Halted { class: BlockedClass, steps: u64 },
    /// The machine was still running when fuel ran out. This is *not* a
    /// divergence claim.
    OutOfFuel { last: Process },
}

pub fn run(p: &Process, fuel: u64, oracle: &dyn EquivOracle) -> RunOutcome {
    let mut current = p.clone();
    let mut steps = 0u64;
    loop {
        match step_with_rule(&current, oracle) {
            Ok((next, _)) => {
                if steps == fuel {
                    return RunOutcome::OutOfFuel { last: current };
                }
                steps += 1;
                current = next;
            }
            Err(BlockedClass::Final(value, stack_var)) => {
                return RunOutcome::Converged { value, stack_var, steps };
            }
            Err(class) => return RunOutcome::Halted { class, steps },
        }
    }
}

/// The successive machine states starting at `p`, at most `fuel + 1`.
pub fn trace(p: &Process, fuel: u64, oracle: &dyn EquivOracle) -> Vec<Process> {
    trace_with_rules(p, fuel, oracle)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// Trace annotated with the rule that leaves each state (`None` on the
/// last state).
pub fn trace_with_rules(
    p: &Process,
    fuel: u64,
    oracle: &dyn EquivOracle,
) -> Vec<(Process, Option<Rule>)> {
    let mut out = Vec::new();
    let mut current = p.clone();
    let mut used = 0u64;
    loop {
        match step_with_rule(&current, oracle) {
            Ok((next, rule)) if used < fuel => {
                out.push((current, Some(rule)));
                current = next;
                used += 1;
            }
            _ => {
                out.push((current, None));
                return out;
            }
        }
    }
}

/// One trace entry in the structured serialization.
#[derive(Serialize)]
pub struct TraceEntry {
    pub term: String,
    pub stack: String,
    pub rule: Option<Rule>,
}

/// Serialize a trace to one JSON object per state.
pub fn trace_json(steps: &[(Process, Option<Rule>)]) -> Vec<TraceEntry> {
    steps
        .iter()
        .map(|(p, rule)| TraceEntry {
            term: p.term.to_string(),
            stack: p.stack.to_string(),
            rule: *rule,
        })
        .collect()
}

/// Line-oriented text form of a trace.
pub fn trace_text(steps: &[(Process, Option<Rule>)]) -> String {
    let mut out = String::new();
    for (p, rule) in steps {
        match rule {
            Some(r) => out.push_str(&format!("{p}   ≻ {r:?}\n")),
            None => out.push_str(&format!("{p}\n")),
        }
    }
    out
}

impl BlockedClass {
    pub fn describe(&self) -> String {
        match self {
            BlockedClass::Final(v, a) => format!("final: {v} ∗ {a}"),
            BlockedClass::Stuck(f) => format!("stuck: {f:?}"),
            BlockedClass::DeltaLike(v, w, _) => format!("delta-like: δ({v}, {w})"),
            BlockedClass::OpenLambdaVar(f) => format!("open lambda-variable ({f:?})"),
            BlockedClass::OpenTermVar(_) => "open term variable".to_string(),
            BlockedClass::ScissorsHit => "scissors: the machine failed".to_string(),
        }
    }
}
