//! Bounded observational counterexample search: enumerate stack contexts
//! (pushes of closed values and frames of probe functions) and closed
//! substitutions for the free variables, then run both sides on the
//! machine. A witness where the non-converging side ends in a genuinely
//! blocked state is a sound refutation; a side that merely ran out of
//! fuel (or blocked on an undecided δ) only yields a "suspected" witness.
//!
//! The same search, at a strictly smaller δ index, answers the machine's
//! δ-oracle queries; index 0 never fires a δ.

use crate::equivalence::Budget;
use crate::machine::{run, BlockedClass, EquivOracle, OracleAnswer, RunOutcome};
use crate::syntax::{
    alpha_canonical_value, free_vars_term, fresh, Binding, Name, Process, Stack, Subst, Term,
    Value,
};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

/// A (possibly suspected) behavioural counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct SearchWitness {
    /// The distinguishing stack context, printed.
    pub stack: String,
    /// The closed substitution used, printed per variable.
    pub substitution: Vec<(String, String)>,
    /// Which side converged.
    pub converging: Side,
    /// Machine trace of the left side (possibly truncated).
    pub lhs_trace: Vec<String>,
    /// Machine trace of the right side (possibly truncated).
    pub rhs_trace: Vec<String>,
    /// True when the non-converging side is provably blocked; false when
    /// it merely exhausted fuel or blocked on an undecided δ.
    pub sound: bool,
    #[serde(skip)]
    pub stack_ctx: Stack,
    #[serde(skip)]
    pub bindings: Vec<Binding>,
}

fn collect_ctors_labels(t: &Term, ctors: &mut BTreeSet<Name>, labels: &mut BTreeSet<Name>) {
    fn value(v: &Value, ctors: &mut BTreeSet<Name>, labels: &mut BTreeSet<Name>) {
        match v {
            Value::Var(_) | Value::Scissors => {}
            Value::Lam(_, t) => collect_ctors_labels(t, ctors, labels),
            Value::Ctor(c, v) => {
                ctors.insert(c.clone());
                value(v, ctors, labels);
            }
            Value::Record(fs) => {
                for (l, v) in fs {
                    labels.insert(l.clone());
                    value(v, ctors, labels);
                }
            }
            Value::UnitProbe(v) => value(v, ctors, labels),
        }
    }
    fn stack(s: &Stack, ctors: &mut BTreeSet<Name>, labels: &mut BTreeSet<Name>) {
        match s {
            Stack::Var(_) => {}
            Stack::Push(v, rest) => {
                value(v, ctors, labels);
                stack(rest, ctors, labels);
            }
            Stack::Frame(t, rest) => {
                collect_ctors_labels(t, ctors, labels);
                stack(rest, ctors, labels);
            }
        }
    }
    match t {
        Term::Val(v) => value(v, ctors, labels),
        Term::TermVar(_) => {}
        Term::App(a, b) => {
            collect_ctors_labels(a, ctors, labels);
            collect_ctors_labels(b, ctors, labels);
        }
        Term::Mu(_, t) => collect_ctors_labels(t, ctors, labels),
        Term::Proc(p) => {
            collect_ctors_labels(&p.term, ctors, labels);
            stack(&p.stack, ctors, labels);
        }
        Term::Proj(v, l) => {
            labels.insert(l.clone());
            value(v, ctors, labels);
        }
        Term::Case(v, bs) => {
            value(v, ctors, labels);
            for (c, (_, body)) in bs {
                ctors.insert(c.clone());
                collect_ctors_labels(body, ctors, labels);
            }
        }
        Term::Delta(v, w) => {
            value(v, ctors, labels);
            value(w, ctors, labels);
        }
    }
}

/// A closed stuck term used as the "dead" branch of probes. Unlike a
/// diverging loop, hitting it is machine-checkable evidence of
/// non-convergence.
fn bot_term() -> Term {
    Term::Proj(Box::new(Value::unit()), Name::new("l"))
}

struct ProbeSpace {
    values: Vec<Value>,
    probes: Vec<Term>,
    term_candidates: Vec<Term>,
}

fn probe_space(lhs: &Term, rhs: &Term, budget: &Budget) -> ProbeSpace {
    let mut ctors = BTreeSet::new();
    let mut labels = BTreeSet::new();
    collect_ctors_labels(lhs, &mut ctors, &mut labels);
    collect_ctors_labels(rhs, &mut ctors, &mut labels);

    let mut values = vec![Value::unit(), Value::Lam(Name::new("x"), Box::new(Term::var("x")))];
    for c in &ctors {
        values.push(Value::Ctor(c.clone(), Box::new(Value::unit())));
    }
    for l in &labels {
        let mut fs = std::collections::BTreeMap::new();
        fs.insert(l.clone(), Value::unit());
        values.push(Value::Record(fs));
    }
    values.retain(|v| v.size() <= budget.subst_size.max(1));
    values.truncate(8);

    // probe functions: unit probe, one projection per label, one
    // single-branch case per constructor
    let mut probes = vec![Term::lam(
        "x",
        Term::Val(Value::UnitProbe(Box::new(Value::Var(Name::new("x"))))),
    )];
    for l in &labels {
        probes.push(Term::lam(
            "x",
            Term::Proj(Box::new(Value::Var(Name::new("x"))), l.clone()),
        ));
    }
    for c in &ctors {
        let mut bs = std::collections::BTreeMap::new();
        bs.insert(c.clone(), (Name::new("y"), Term::var("y")));
        probes.push(Term::lam(
            "x",
            Term::Case(Box::new(Value::Var(Name::new("x"))), bs),
        ));
    }
    probes.truncate(8);

    let mut term_candidates: Vec<Term> =
        values.iter().map(|v| Term::Val(v.clone())).collect();
    term_candidates.push(bot_term());

    ProbeSpace { values, probes, term_candidates }
}

/// All stack contexts of exactly `depth` layers over the probe space,
/// ending in the given stack variable, in a fixed enumeration order.
fn stacks_of_depth(space: &ProbeSpace, depth: usize, end: &Name) -> Vec<Stack> {
    if depth == 0 {
        return vec![Stack::Var(end.clone())];
    }
    let tails = stacks_of_depth(space, depth - 1, end);
    let mut out = Vec::new();
    for tail in &tails {
        for v in &space.values {
            out.push(Stack::Push(Box::new(v.clone()), Box::new(tail.clone())));
        }
        for p in &space.probes {
            out.push(Stack::Frame(Box::new(p.clone()), Box::new(tail.clone())));
        }
    }
    out
}

/// All candidate substitutions for the free lambda- and term-variables,
/// in mixed-radix enumeration order, capped for tractability.
fn substitutions(space: &ProbeSpace, lhs: &Term, rhs: &Term) -> Vec<Vec<Binding>> {
    let mut fv = free_vars_term(lhs);
    let fv2 = free_vars_term(rhs);
    fv.lambda.extend(fv2.lambda);
    fv.term.extend(fv2.term);

    let lambda_vars: Vec<Name> = fv.lambda.into_iter().collect();
    let term_vars: Vec<Name> = fv.term.into_iter().collect();
    if lambda_vars.is_empty() && term_vars.is_empty() {
        return vec![Vec::new()];
    }

    let mut slots: Vec<(Name, Vec<Binding>)> = Vec::new();
    for x in lambda_vars {
        let cands = space
            .values
            .iter()
            .map(|v| Binding::LambdaVar(x.clone(), v.clone()))
            .collect();
        slots.push((x, cands));
    }
    for a in term_vars {
        let cands = space
            .term_candidates
            .iter()
            .map(|t| Binding::TermVar(a.clone(), t.clone()))
            .collect();
        slots.push((a, cands));
    }

    const CAP: usize = 512;
    let mut out = vec![Vec::new()];
    for (_, cands) in &slots {
        let mut next = Vec::new();
        'outer: for partial in &out {
            for c in cands {
                let mut s = partial.clone();
                s.push(c.clone());
                next.push(s);
                if next.len() >= CAP {
                    break 'outer;
                }
            }
        }
        out = next;
    }
    out
}

fn apply_bindings(t: &Term, bindings: &[Binding]) -> Term {
    bindings
        .iter()
        .fold(t.clone(), |acc, b| Subst::new(b.clone()).apply_term(&acc))
}

const TRACE_CAP: usize = 120;

fn capped_trace(p: &Process, fuel: u64, oracle: &dyn EquivOracle) -> Vec<String> {
    let all = crate::machine::trace(p, fuel.min(TRACE_CAP as u64), oracle);
    let mut out: Vec<String> = all.iter().map(|p| p.to_string()).collect();
    if out.len() >= TRACE_CAP {
        out.push("…".to_string());
    }
    out
}

enum ProbeVerdict {
    Sound(Side),
    Suspected(Side),
    NoDifference,
}

fn judge(lhs_out: &RunOutcome, rhs_out: &RunOutcome) -> ProbeVerdict {
    let conv = |o: &RunOutcome| matches!(o, RunOutcome::Converged { .. });
    let provably_blocked = |o: &RunOutcome| {
        matches!(o, RunOutcome::Halted { class, .. } if !matches!(class, BlockedClass::DeltaLike(..)))
    };
    match (conv(lhs_out), conv(rhs_out)) {
        (true, false) => {
            if provably_blocked(rhs_out) {
                ProbeVerdict::Sound(Side::Lhs)
            } else {
                ProbeVerdict::Suspected(Side::Lhs)
            }
        }
        (false, true) => {
            if provably_blocked(lhs_out) {
                ProbeVerdict::Sound(Side::Rhs)
            } else {
                ProbeVerdict::Suspected(Side::Rhs)
            }
        }
        _ => ProbeVerdict::NoDifference,
    }
}

/// Search for a stack context and substitution under which one side
/// converges and the other does not. Returns the first (smallest, in the
/// fixed enumeration order) sound witness if any, otherwise the first
/// suspected witness, otherwise `None`.
pub fn search_inequivalence(lhs: &Term, rhs: &Term, budget: &Budget) -> Option<SearchWitness> {
    let space = probe_space(lhs, rhs, budget);
    let end = fresh(&Name::new("α"));
    let oracle = SearchOracle { budget: budget.clone() };
    let mut suspected: Option<SearchWitness> = None;

    for depth in 0..=budget.search_depth {
        for stack in stacks_of_depth(&space, depth, &end) {
            for bindings in substitutions(&space, lhs, rhs) {
                let l = apply_bindings(lhs, &bindings);
                let r = apply_bindings(rhs, &bindings);
                let lp = Process::new(l, stack.clone());
                let rp = Process::new(r, stack.clone());
                let lo = run(&lp, budget.machine_fuel, &oracle);
                let ro = run(&rp, budget.machine_fuel, &oracle);
                let verdict = judge(&lo, &ro);
                let (converging, sound) = match verdict {
                    ProbeVerdict::Sound(s) => (s, true),
                    ProbeVerdict::Suspected(s) => (s, false),
                    ProbeVerdict::NoDifference => continue,
                };
                let witness = SearchWitness {
                    stack: stack.to_string(),
                    substitution: bindings
                        .iter()
                        .map(|b| match b {
                            Binding::LambdaVar(x, v) => (x.to_string(), v.to_string()),
                            Binding::MuVar(a, s) => (a.to_string(), s.to_string()),
                            Binding::TermVar(a, t) => (a.to_string(), t.to_string()),
                        })
                        .collect(),
                    converging,
                    lhs_trace: capped_trace(&lp, budget.machine_fuel, &oracle),
                    rhs_trace: capped_trace(&rp, budget.machine_fuel, &oracle),
                    sound,
                    stack_ctx: stack.clone(),
                    bindings,
                };
                if sound {
                    return Some(witness);
                }
                if suspected.is_none() {
                    suspected = Some(witness);
                }
            }
        }
    }
    suspected
}

/// The machine's δ-oracle: fires a δ only when a search at strictly
/// smaller index finds a sound witness. Index 0 never fires.
pub struct SearchOracle {
    pub budget: Budget,
}

type OracleCache = Mutex<HashMap<(usize, u64, usize, usize, String, String), bool>>;

fn oracle_cache() -> &'static OracleCache {
    static CACHE: OnceLock<OracleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl EquivOracle for SearchOracle {
    fn query(&self, left: &Value, right: &Value) -> OracleAnswer {
        if self.budget.delta_index == 0 {
            return OracleAnswer::NotKnownInequivalent;
        }
        let sub = Budget { delta_index: self.budget.delta_index - 1, ..self.budget.clone() };
        let key = (
            sub.delta_index,
            sub.machine_fuel,
            sub.search_depth,
            sub.subst_size,
            alpha_canonical_value(left).to_string(),
            alpha_canonical_value(right).to_string(),
        );
        if let Some(&hit) = oracle_cache().lock().unwrap().get(&key) {
            return if hit {
                OracleAnswer::DefinitelyInequivalent
            } else {
                OracleAnswer::NotKnownInequivalent
            };
        }
        let found = matches!(
            search_inequivalence(
                &Term::Val(left.clone()),
                &Term::Val(right.clone()),
                &sub,
            ),
            Some(w) if w.sound
        );
        oracle_cache().lock().unwrap().insert(key, found);
        if found {
            OracleAnswer::DefinitelyInequivalent
        } else {
            OracleAnswer::NotKnownInequivalent
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::step;
    use crate::machine::StepResult;

    fn small_budget() -> Budget {
        Budget { machine_fuel: 1_000, search_depth: 3, subst_size: 3, delta_index: 2 }
    }

    fn ctor(c: &str, v: Value) -> Term {
        Term::Val(Value::Ctor(Name::new(c), Box::new(v)))
    }

    #[test]
    fn distinct_ctors_found_with_case_probe() {
        let w = search_inequivalence(
            &ctor("C", Value::unit()),
            &ctor("D", Value::unit()),
            &small_budget(),
        )
        .expect("witness");
        assert!(w.sound);
        assert!(w.stack.contains("case"), "stack = {}", w.stack);
    }

    #[test]
    fn lambda_vs_empty_record_found() {
        // the identity converges when applied, the record is stuck
        let w = search_inequivalence(
            &Term::lam("x", Term::var("x")),
            &Term::Val(Value::unit()),
            &small_budget(),
        )
        .expect("witness");
        assert!(w.sound);
    }

    #[test]
    fn diverging_lambda_vs_empty_record_needs_unit_probe() {
        // λx Ω and {} cannot be told apart by application: the unit probe
        // is the only sound separator
        let dup = Term::lam("y", Term::app(Term::var("y"), Term::var("y")));
        let omega = Term::app(dup.clone(), dup);
        let w = search_inequivalence(
            &Term::lam("x", omega),
            &Term::Val(Value::unit()),
            &small_budget(),
        )
        .expect("witness");
        assert!(w.sound);
        assert!(w.stack.contains("unit"), "stack = {}", w.stack);
        assert_eq!(w.converging, Side::Rhs);
    }

    #[test]
    fn beta_equal_terms_have_no_witness() {
        let lhs = Term::app(Term::lam("x", Term::var("x")), Term::Val(Value::unit()));
        let rhs = Term::Val(Value::unit());
        let budget = Budget { machine_fuel: 100, search_depth: 3, subst_size: 3, delta_index: 1 };
        assert!(search_inequivalence(&lhs, &rhs, &budget).is_none());
    }

    #[test]
    fn stratified_oracle_fires_delta() {
        // δ(λx x, {}) steps at index ≥ 1 because the unit probe separates
        // the two values at index 0
        let oracle = SearchOracle { budget: small_budget() };
        let id = Value::Lam(Name::new("x"), Box::new(Term::var("x")));
        let p = Process::new(
            Term::Delta(Box::new(id.clone()), Box::new(Value::unit())),
            Stack::Var(Name::new("α")),
        );
        match step(&p, &oracle) {
            StepResult::Next(q) => assert_eq!(q.term, Term::Val(id)),
            other => panic!("δ did not fire: {other:?}"),
        }
        // at index 0 it must stay blocked
        let level0 = SearchOracle {
            budget: Budget { delta_index: 0, ..small_budget() },
        };
        assert!(matches!(step(&p, &level0), StepResult::Blocked(_)));
    }

    #[test]
    fn equivalent_values_leave_delta_stuck() {
        let oracle = SearchOracle { budget: small_budget() };
        let p = Process::new(
            Term::Delta(Box::new(Value::unit()), Box::new(Value::unit())),
            Stack::Var(Name::new("α")),
        );
        assert!(matches!(step(&p, &oracle), StepResult::Blocked(_)));
    }

    #[test]
    fn oracle_answers_stable_on_alpha_equal_inputs() {
        let oracle = SearchOracle { budget: small_budget() };
        let a1 = Value::Lam(Name::new("x"), Box::new(Term::var("x")));
        let a2 = Value::Lam(Name::new("y"), Box::new(Term::var("y")));
        let first = oracle.query(&a1, &Value::unit());
        let second = oracle.query(&a2, &Value::unit());
        let third = oracle.query(&a1, &Value::unit());
        assert_eq!(first, second);
        assert_eq!(first, third);
    }

    #[test]
    fn open_terms_substituted() {
        // x vs C[x]: substituting {} for x and probing with the C-case
        // probe separates them
        let w = search_inequivalence(
            &Term::var("x"),
            &ctor("C", Value::Var(Name::new("x"))),
            &small_budget(),
        )
        .expect("witness");
        assert!(w.sound);
        assert!(!w.substitution.is_empty());
    }
}
