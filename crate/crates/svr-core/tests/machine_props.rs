//! Machine conformance: an independent rule-applicability oracle checks
//! determinism, the blocked-state taxonomy is compared against
//! independent predicates on exhaustively enumerated small processes,
//! and reduction commutes with substitution.

mod common;

use common::{applicable_rules, class_label, expected_block, n, Enumerator, Gen};
use svr_core::machine::{step, BlockedClass, NullOracle, StepResult};
use svr_core::syntax::{
    alpha_eq_process, free_vars_process, subst_process, Binding, Process, Stack, Term, Value,
};

#[test]
fn determinism_and_classification_small_exhaustive() {
    let e = Enumerator::new(5);
    let mut seen = 0usize;
    let mut blocked = 0usize;
    e.for_each_process(5, |p| {
        seen += 1;
        let rules = applicable_rules(p);
        assert!(
            rules.len() <= 1,
            "more than one rule applies to {p}: {rules:?}"
        );
        match step(p, &NullOracle) {
            StepResult::Next(_) => {
                assert_eq!(rules.len(), 1, "machine stepped but no rule applies to {p}");
            }
            StepResult::Blocked(class) => {
                blocked += 1;
                assert!(rules.is_empty(), "machine blocked but {rules:?} applies to {p}");
                assert_eq!(
                    class_label(&class),
                    expected_block(p),
                    "classification mismatch on {p}: got {class:?}"
                );
            }
        }
    });
    assert!(seen > 2_000, "enumeration too small: {seen}");
    assert!(blocked > 500, "blocked sample too small: {blocked}");
}

#[test]
fn stuck_states_stay_stuck_under_substitution() {
    // Every stuck process stays blocked (and stuck) for any substitution.
    let e = Enumerator::new(4);
    let mut gen = Gen::new(7);
    let mut checked = 0usize;
    e.for_each_process(4, |p| {
        if let StepResult::Blocked(BlockedClass::Stuck(form)) = step(p, &NullOracle) {
            let fv = free_vars_process(p);
            for _ in 0..3 {
                let mut q = p.clone();
                for x in &fv.lambda {
                    let v = gen.closed_value(1);
                    q = subst_process(&q, Binding::LambdaVar(x.clone(), v));
                }
                for a in &fv.mu {
                    let s = gen.open_stack(1);
                    q = subst_process(&q, Binding::MuVar(a.clone(), s));
                }
                for t in &fv.term {
                    let u = gen.closed_term(1);
                    q = subst_process(&q, Binding::TermVar(t.clone(), u));
                }
                match step(&q, &NullOracle) {
                    StepResult::Blocked(BlockedClass::Stuck(f2)) => {
                        assert_eq!(form, f2, "stuck form changed under substitution: {p}")
                    }
                    other => panic!("stuck state unblocked by substitution: {p} → {other:?}"),
                }
                checked += 1;
            }
        }
    });
    assert!(checked > 100, "too few stuck samples: {checked}");
}

#[test]
fn reduction_commutes_with_substitution() {
    // For δ-free p with step(p) = Next(q) and any well-sorted binding σ:
    // step(pσ) = Next(qσ) up to alpha.
    let mut gen = Gen::new(42);
    let mut stepped = 0usize;
    for _ in 0..600 {
        let p = gen.process(3);
        let StepResult::Next(q) = step(&p, &NullOracle) else { continue };
        let fv = free_vars_process(&p);
        let mut bindings: Vec<Binding> = Vec::new();
        for x in fv.lambda.iter().take(2) {
            bindings.push(Binding::LambdaVar(x.clone(), gen.closed_value(2)));
        }
        for a in fv.mu.iter().take(2) {
            bindings.push(Binding::MuVar(a.clone(), gen.open_stack(2)));
        }
        for t in fv.term.iter().take(2) {
            bindings.push(Binding::TermVar(t.clone(), gen.closed_term(2)));
        }
        for b in bindings {
            let p_sub = subst_process(&p, b.clone());
            let q_sub = subst_process(&q, b.clone());
            match step(&p_sub, &NullOracle) {
                StepResult::Next(q2) => {
                    assert!(
                        alpha_eq_process(&q2, &q_sub),
                        "substitution does not commute on {p}\n  binding {b:?}\n  got {q2}\n  want {q_sub}"
                    );
                    stepped += 1;
                }
                StepResult::Blocked(c) => {
                    panic!("substitution blocked a reducible process {p}: {c:?}")
                }
            }
        }
    }
    assert!(stepped > 300, "too few commuting samples: {stepped}");
}

#[test]
fn mu_capture_example() {
    // μk ({} ∗ k) ∗ β steps to ({} ∗ β) ∗ β and then restarts
    let body = Term::Proc(Box::new(Process::new(
        Term::Val(Value::unit()),
        Stack::Var(n("k")),
    )));
    let p = Process::new(Term::Mu(n("k"), Box::new(body)), Stack::Var(n("beta")));
    let StepResult::Next(q) = step(&p, &NullOracle) else { panic!("mu must fire") };
    let StepResult::Next(r) = step(&q, &NullOracle) else { panic!("restart must fire") };
    assert_eq!(r, Process::new(Term::Val(Value::unit()), Stack::Var(n("beta"))));
}
