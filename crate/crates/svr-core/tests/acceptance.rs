//! Acceptance suite. One test per criterion; each prints a PASS line
//! with its measured numbers when it completes.

mod common;

use common::{applicable_rules, class_label, expected_block, n, Enumerator, Gen};
use std::collections::BTreeMap;
use std::time::Instant;
use svr_core::checker::{validate, Ast, Checker, Derivation, RuleTag, SideCondition, TypeTable};
use svr_core::equivalence::{
    decide, search_inequivalence, Budget, EquationalContext, Polarity, SearchOracle, Verdict,
};
use svr_core::machine::{run, step, NullOracle, RunOutcome, StepResult};
use svr_core::surface::{elaborate_module, link_definition, DeclStatus};
use svr_core::syntax::{
    alpha_eq_process, free_vars_process, subst_process, subst_term, Binding, Name, Process,
    Stack, Term, Value,
};
use svr_core::types::{is_pure, restrict_to_equational, ContextEntry, Formula, TypingContext};

const INTRO: &str = r#"
type nat = Z[] | S[nat]
let rec add n m = match n with
  | Z[]   -> m
  | S[nn] -> S[add nn m]
let addZeroN n:nat : (add Z[] n == n) = %%
let rec addNZero n:nat : (add n Z[] == n) =
  match n with
  | Z[]   -> %%
  | S[nn] -> let r = addNZero nn in %%
"#;

/// Criterion 1: the intro programs check, their derivations replay, and
/// the two recursive items carry the totality note. Under five seconds.
#[test]
fn acceptance_1_intro_programs() {
    let started = Instant::now();
    let budget = Budget::default();
    let module = elaborate_module(INTRO, &budget);
    assert!(module.diagnostics.is_empty(), "{:?}", module.diagnostics);
    assert!(!module.failed(), "intro module failed");
    let statuses: Vec<(String, DeclStatus)> =
        module.decls.iter().map(|d| (d.name.clone(), d.status)).collect();
    assert_eq!(statuses[1], ("add".to_string(), DeclStatus::AssumesTotality));
    assert_eq!(statuses[2], ("addZeroN".to_string(), DeclStatus::Ok));
    assert_eq!(statuses[3], ("addNZero".to_string(), DeclStatus::AssumesTotality));
    let mut validated = 0;
    for d in &module.decls {
        if let Some(derivation) = &d.derivation {
            assert!(
                validate(&module.table, &budget, derivation),
                "derivation of {} does not replay",
                d.name
            );
            validated += 1;
        }
    }
    assert!(validated >= 2, "expected derivations for the two proofs");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "too slow: {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS: intro programs check, {validated} derivations replay, \
         rec items flagged, {:.2}s < 5s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: golden one-step table for the reduction rules, plus the
/// exhaustive blocked-state classification at size ≤ 6. Under a minute.
#[test]
fn acceptance_2_machine_conformance() {
    let started = Instant::now();
    let k = || Stack::Var(n("k"));
    let unit_t = || Term::Val(Value::unit());
    let id_v = || Value::Lam(n("x"), Box::new(Term::var("x")));

    // the seven reduction rules, plus δ-fire and the unit probe
    let mut fs = BTreeMap::new();
    fs.insert(n("l1"), Value::unit());
    let mut bs = BTreeMap::new();
    bs.insert(n("C"), (n("x"), Term::var("x")));
    let table: Vec<(&str, Process, Process)> = vec![
        (
            "application",
            Process::new(Term::app(unit_t(), unit_t()), k()),
            Process::new(unit_t(), Stack::Frame(Box::new(unit_t()), Box::new(k()))),
        ),
        (
            "value meets frame",
            Process::new(unit_t(), Stack::Frame(Box::new(Term::var("x")), Box::new(k()))),
            Process::new(
                Term::var("x"),
                Stack::Push(Box::new(Value::unit()), Box::new(k())),
            ),
        ),
        (
            "beta",
            Process::new(
                Term::Val(id_v()),
                Stack::Push(Box::new(Value::unit()), Box::new(k())),
            ),
            Process::new(unit_t(), k()),
        ),
        (
            "mu capture",
            Process::new(
                Term::Mu(
                    n("a"),
                    Box::new(Term::Proc(Box::new(Process::new(
                        unit_t(),
                        Stack::Var(n("a")),
                    )))),
                ),
                k(),
            ),
            Process::new(
                Term::Proc(Box::new(Process::new(unit_t(), k()))),
                k(),
            ),
        ),
        (
            "process restart",
            Process::new(
                Term::Proc(Box::new(Process::new(Term::var("x"), Stack::Var(n("b"))))),
                k(),
            ),
            Process::new(Term::var("x"), Stack::Var(n("b"))),
        ),
        (
            "projection",
            Process::new(Term::Proj(Box::new(Value::Record(fs)), n("l1")), k()),
            Process::new(unit_t(), k()),
        ),
        (
            "case dispatch",
            Process::new(
                Term::Case(Box::new(Value::Ctor(n("C"), Box::new(Value::unit()))), bs),
                k(),
            ),
            Process::new(unit_t(), k()),
        ),
        (
            "unit probe",
            Process::new(Term::Val(Value::UnitProbe(Box::new(Value::unit()))), k()),
            Process::new(unit_t(), k()),
        ),
    ];
    for (name, input, expected) in &table {
        match step(input, &NullOracle) {
            StepResult::Next(got) => {
                assert!(alpha_eq_process(&got, expected), "{name}: {input} → {got}, want {expected}")
            }
            other => panic!("{name}: did not step: {other:?}"),
        }
    }
    // δ-fire through the stratified oracle
    let delta = Process::new(
        Term::Delta(Box::new(id_v()), Box::new(Value::unit())),
        k(),
    );
    let oracle = SearchOracle {
        budget: Budget { machine_fuel: 1_000, search_depth: 2, subst_size: 2, delta_index: 1 },
    };
    match step(&delta, &oracle) {
        StepResult::Next(got) => {
            assert!(alpha_eq_process(&got, &Process::new(Term::Val(id_v()), k())))
        }
        other => panic!("δ did not fire: {other:?}"),
    }

    // exhaustive classification at size ≤ 6 on the {C,D}/{l1,l2} alphabet
    let e = Enumerator::new(6);
    let mut total = 0usize;
    let mut blocked = 0usize;
    e.for_each_process(6, |p| {
        total += 1;
        let rules = applicable_rules(p);
        assert!(rules.len() <= 1, "two rules apply to {p}: {rules:?}");
        match step(p, &NullOracle) {
            StepResult::Next(_) => {
                assert_eq!(rules.len(), 1, "machine stepped without an applicable rule: {p}")
            }
            StepResult::Blocked(class) => {
                blocked += 1;
                assert!(rules.is_empty(), "machine blocked under an applicable rule: {p}");
                assert_eq!(
                    class_label(&class),
                    expected_block(p),
                    "classification mismatch on {p}"
                );
            }
        }
    });
    assert!(total > 25_000, "enumeration unexpectedly small: {total}");
    assert!(blocked > 5_000, "blocked coverage too small: {blocked}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "too slow: {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS: 9-rule golden table, {total} processes enumerated \
         ({blocked} blocked, all classified), {:.2}s < 60s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 3: reduction commutes with substitution on 1000 generated
/// δ-free processes, 100% of sampled substitutions.
#[test]
fn acceptance_3_substitution_compatibility() {
    let mut gen = Gen::new(2024);
    let mut checked_processes = 0usize;
    let mut checked_substitutions = 0usize;
    while checked_processes < 1_000 {
        let p = gen.process(3);
        let StepResult::Next(q) = step(&p, &NullOracle) else { continue };
        checked_processes += 1;
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
        if bindings.is_empty() {
            bindings.push(Binding::LambdaVar(n("unused"), Value::unit()));
        }
        for b in bindings {
            let p_sub = subst_process(&p, b.clone());
            let q_sub = subst_process(&q, b.clone());
            match step(&p_sub, &NullOracle) {
                StepResult::Next(q2) => assert!(
                    alpha_eq_process(&q2, &q_sub),
                    "failed on {p} with {b:?}"
                ),
                other => panic!("substitution blocked {p}: {other:?}"),
            }
            checked_substitutions += 1;
        }
    }
    println!(
        "ACCEPTANCE 3 PASS: {checked_processes} processes × {checked_substitutions} \
         substitutions, 100% commute"
    );
}

fn axiom_instance(gen: &mut Gen, which: u8) -> (Term, Term) {
    match which % 3 {
        0 => {
            let body = gen.closed_term_with(&[n("x")], 2);
            let v = gen.closed_value(2);
            let redex = Term::app(Term::lam("x", body.clone()), Term::Val(v.clone()));
            (redex, subst_term(&body, Binding::LambdaVar(n("x"), v)))
        }
        1 => {
            let v = gen.closed_value(2);
            let mut fs = BTreeMap::new();
            fs.insert(n("l1"), v.clone());
            fs.insert(n("l2"), gen.closed_value(1));
            (Term::Proj(Box::new(Value::Record(fs)), n("l1")), Term::Val(v))
        }
        _ => {
            let v = gen.closed_value(1);
            let body = gen.closed_term_with(&[n("x")], 2);
            let other = gen.closed_term_with(&[n("x")], 1);
            let mut bs = BTreeMap::new();
            bs.insert(n("C"), (n("x"), body.clone()));
            bs.insert(n("D"), (n("x"), other));
            (
                Term::Case(Box::new(Value::Ctor(n("C"), Box::new(v.clone()))), bs),
                subst_term(&body, Binding::LambdaVar(n("x"), v)),
            )
        }
    }
}

fn clash_pair(gen: &mut Gen, which: u32) -> (Term, Term) {
    let v = match which % 5 {
        0 => (
            Value::Ctor(n("C"), Box::new(gen.closed_value(1))),
            Value::Ctor(n("D"), Box::new(gen.closed_value(1))),
        ),
        1 => {
            let mut f1 = BTreeMap::new();
            f1.insert(n("l1"), gen.closed_value(1));
            let mut f2 = BTreeMap::new();
            f2.insert(n("l2"), gen.closed_value(1));
            (Value::Record(f1), Value::Record(f2))
        }
        2 => (
            Value::Lam(n("x"), Box::new(gen.closed_term_with(&[n("x")], 1))),
            Value::Ctor(n("C"), Box::new(gen.closed_value(1))),
        ),
        3 => (
            Value::Lam(n("x"), Box::new(gen.closed_term_with(&[n("x")], 1))),
            Value::Record(BTreeMap::new()),
        ),
        _ => {
            let mut f1 = BTreeMap::new();
            f1.insert(n("l1"), gen.closed_value(1));
            (Value::Ctor(n("C"), Box::new(gen.closed_value(1))), Value::Record(f1))
        }
    };
    (Term::Val(v.0), Term::Val(v.1))
}

/// Criterion 4: the equational axiom suite at the stated budgets.
#[test]
fn acceptance_4_axiom_suite() {
    let empty = EquationalContext::default();
    let decide_budget =
        Budget { machine_fuel: 10_000, search_depth: 3, subst_size: 3, delta_index: 1 };

    // ≥ 500 closed axiom instances proved
    let mut gen = Gen::new(404);
    let proved_target = 510u32;
    for i in 0..proved_target {
        let (redex, contractum) = axiom_instance(&mut gen, (i % 251) as u8);
        let v = decide(&empty, &redex, &contractum, Polarity::Equiv, &decide_budget);
        assert!(v.is_proved(), "axiom instance #{i} not proved: {redex} ≡ {contractum}");
    }

    // ≥ 200 clash pairs refuted, and behaviourally confirmed
    let search_budget =
        Budget { machine_fuel: 10_000, search_depth: 3, subst_size: 3, delta_index: 1 };
    let clash_target = 220u32;
    let mut sound_at_3 = 0u32;
    let mut sound_at_4 = 0u32;
    for i in 0..clash_target {
        let (lhs, rhs) = clash_pair(&mut gen, i);
        let v = decide(&empty, &lhs, &rhs, Polarity::Equiv, &decide_budget);
        assert!(v.is_refuted(), "clash pair #{i} not refuted: {lhs} vs {rhs}");
        match search_inequivalence(&lhs, &rhs, &search_budget) {
            Some(w) if w.sound => sound_at_3 += 1,
            _ => {
                // the remainder must be confirmable at depth 4
                let deeper = Budget { search_depth: 4, ..search_budget.clone() };
                let w = search_inequivalence(&lhs, &rhs, &deeper)
                    .unwrap_or_else(|| panic!("no witness at depth 4 for {lhs} vs {rhs}"));
                assert!(w.sound, "witness at depth 4 not sound for {lhs} vs {rhs}");
                sound_at_4 += 1;
            }
        }
    }
    let ratio = sound_at_3 as f64 / clash_target as f64;
    assert!(ratio >= 0.95, "only {ratio:.3} of refutations confirmed at depth 3");
    println!(
        "ACCEPTANCE 4 PASS: {proved_target} axiom instances proved, {clash_target} clashes \
         refuted, {sound_at_3} confirmed at depth 3 ({:.1}%), {sound_at_4} at depth 4",
        100.0 * ratio
    );
}

/// Criterion 5: the two engines never contradict each other on 1000
/// random closed pairs.
#[test]
fn acceptance_5_oracle_agreement() {
    let empty = EquationalContext::default();
    let budget = Budget { machine_fuel: 2_000, search_depth: 2, subst_size: 3, delta_index: 1 };
    let mut gen = Gen::new(505);
    let mut proved = 0u32;
    let mut refuted = 0u32;
    let mut unknown = 0u32;
    for i in 0..1_000u32 {
        let (lhs, rhs) = if i % 3 == 0 {
            axiom_instance(&mut gen, (i % 97) as u8)
        } else {
            (gen.closed_term(3), gen.closed_term(3))
        };
        match decide(&empty, &lhs, &rhs, Polarity::Equiv, &budget) {
            Verdict::Proved { .. } => {
                proved += 1;
                if let Some(w) = search_inequivalence(&lhs, &rhs, &budget) {
                    assert!(
                        !w.sound,
                        "engines disagree: proved but sound witness\n  {lhs}\n  {rhs}\n  {w:?}"
                    );
                }
            }
            Verdict::Refuted { .. } => {
                refuted += 1;
                // exhaustive depth-2 search must distinguish the sides
                assert!(
                    search_inequivalence(&lhs, &rhs, &budget).is_some(),
                    "engines disagree: refuted but all probes co-converge\n  {lhs}\n  {rhs}"
                );
            }
            Verdict::Unknown => unknown += 1,
        }
    }
    assert!(proved > 200, "too few proved pairs: {proved}");
    assert!(refuted > 100, "too few refuted pairs: {refuted}");
    println!(
        "ACCEPTANCE 5 PASS: 1000 pairs, {proved} proved / {refuted} refuted / {unknown} \
         unknown, zero disagreements"
    );
}

/// Criterion 6: the derived dependent-application rule expands into
/// primitive rules that replay; deleting the equivalence evidence breaks
/// replay.
#[test]
fn acceptance_6_derived_rule_admissibility() {
    fn strip_equivalence_evidence(d: &mut Derivation) {
        d.side.retain(|s| !matches!(s, SideCondition::Equivalence { .. }));
        for p in &mut d.premises {
            strip_equivalence_evidence(p);
        }
    }
    fn data_value(gen: &mut Gen, depth: usize) -> Value {
        // constructor/record shapes only, so structural synthesis works
        match gen.rng.gen_range(0..3u8) {
            0 => Value::unit(),
            1 if depth > 0 => Value::Ctor(n("C"), Box::new(data_value(gen, depth - 1))),
            _ if depth > 0 => {
                let mut fs = BTreeMap::new();
                fs.insert(n("l1"), data_value(gen, depth - 1));
                Value::Record(fs)
            }
            _ => Value::unit(),
        }
    }
    fn synthesized_type(v: &Value) -> Formula {
        match v {
            Value::Record(fs) => Formula::RecordTy(
                fs.iter().map(|(l, v)| (l.clone(), synthesized_type(v))).collect(),
            ),
            Value::Ctor(c, p) => {
                let mut cs = BTreeMap::new();
                cs.insert(c.clone(), synthesized_type(p));
                Formula::VariantTy(cs)
            }
            _ => Formula::RecordTy(BTreeMap::new()),
        }
    }
    use rand::Rng;
    let table = TypeTable::default();
    let budget = Budget::default();
    let checker = Checker::new(&table, budget.clone());
    let mut gen = Gen::new(606);
    let mut validated = 0;
    for i in 0..50 {
        let v = data_value(&mut gen, 2);
        let dom = synthesized_type(&v);
        let pi = svr_core::types::sugar_pi(
            n("a"),
            dom,
            svr_core::types::sugar_equation(Term::TermVar(n("a")), Term::TermVar(n("a"))),
        );
        let mut ctx = TypingContext::default();
        ctx.push(ContextEntry::LambdaHyp(n("f"), pi));
        // the argument is a redex that normalizes to the value
        let arg = Ast::app(Ast::lam("y", Ast::var("y")), Ast::Core(Term::Val(v.clone())));
        let app = Ast::app(Ast::var("f"), arg);
        let (d, _, _) = checker
            .infer(&ctx, &app)
            .unwrap_or_else(|e| panic!("instance #{i} does not check:\n{e}"));
        assert_eq!(d.rule, RuleTag::MacroPiEEq, "instance #{i} did not use the derived rule");
        // the expansion below the macro tag is primitive
        let expansion_rules = d.premises[0].rules_used();
        assert!(
            expansion_rules.iter().all(|r| r.is_primitive()),
            "instance #{i} has non-primitive rules in the expansion: {expansion_rules:?}"
        );
        assert!(validate(&table, &budget, &d), "instance #{i} does not replay");
        // deleting the equivalence certificate must break replay
        let mut tampered = d.clone();
        strip_equivalence_evidence(&mut tampered);
        assert!(
            !validate(&table, &budget, &tampered),
            "instance #{i} still replays without its certificate"
        );
        validated += 1;
    }
    println!(
        "ACCEPTANCE 6 PASS: {validated} derived-rule instances expand to primitive rules, \
         replay, and reject tampering"
    );
}

/// Criterion 7: checked programs at pure first-order types converge and
/// their results re-check.
#[test]
fn acceptance_7_safety_desk_check() {
    // one module with many checked entry points
    let mut src = String::from(
        "type nat = Z[] | S[nat]\n\
         let rec add (n:nat) (m:nat) : nat = match n with\n\
         | Z[] -> m\n\
         | S[nn] -> S[add nn m]\n",
    );
    let numeral = |k: usize| {
        let mut s = String::from("Z[]");
        for _ in 0..k {
            s = format!("S[{s}]");
        }
        s
    };
    let mut mains: Vec<String> = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            let name = format!("main_{i}_{j}");
            src.push_str(&format!("let {name} : nat = add {} {}\n", numeral(i), numeral(j)));
            mains.push(name);
        }
    }
    // record- and equation-typed programs
    src.push_str("let pr : {fst : nat; snd : nat} = {fst = add Z[] S[Z[]]; snd = Z[]}\n");
    mains.push("pr".into());
    src.push_str("let eq1 : (add Z[] Z[] == Z[]) = %%\n");
    mains.push("eq1".into());
    src.push_str("let two : nat = S[S[Z[]]]\n");
    mains.push("two".into());

    let budget = Budget::default();
    let module = elaborate_module(&src, &budget);
    assert!(!module.failed(), "corpus module failed: {:?}", module.diagnostics);

    let checker = Checker::new(&module.table, budget.clone());
    let resolve = |x: &Name| module.table.get(x).cloned();
    let mut passed = 0usize;
    for name in &mains {
        let def = &module.defs[&Name::new(name)];
        let ty = def.annot.clone().expect("annotated");
        assert!(is_pure(&ty, &resolve), "{name}: type is not pure");
        let linked = link_definition(&module, &Name::new(name)).expect("link");
        let p = Process::new(linked, Stack::Var(n("k")));
        let outcome = run(&p, 100_000, &NullOracle);
        let RunOutcome::Converged { value, .. } = outcome else {
            panic!("{name} did not converge: {outcome:?}");
        };
        // the result re-checks against the declared type in the module
        // context (whose equations the restriction types may need)
        let (d, _) = checker
            .check_value(&module.ctx, &Ast::Core(Term::Val(value.clone())), &ty)
            .unwrap_or_else(|e| panic!("{name}: result {value} does not re-check:\n{e}"));
        assert!(validate(&module.table, &budget, &d));
        passed += 1;
    }
    assert!(passed >= 100, "only {passed} programs");
    println!("ACCEPTANCE 7 PASS: {passed} programs converge and their results re-check");
}

/// Criterion 8: pseudo-proofs of ⊥ all fail; ✂ is accepted exactly when
/// the context is equationally contradictory (or the goal is an equation
/// the procedure proves).
#[test]
fn acceptance_8_consistency_probes() {
    let budget = Budget::default();
    let preamble = "type nat = Z[] | S[nat]\n\
                    let rec loop (n:nat) : nat = loop n\n";
    let probes: Vec<(&str, String)> = vec![
        ("scissors in empty context", "let bad : bot = %%".into()),
        ("identity as bottom", "let bad : bot = fun x -> x".into()),
        ("empty record as bottom", "let bad : bot = {}".into()),
        ("mu discards into bottom", "let bad : bot = mu a -> %% * a".into()),
        ("self application", "let bad : bot = (fun x -> x x) (fun x -> x x)".into()),
        ("forged equation", "let bad : (Z[] == S[Z[]]) = %%".into()),
        (
            "scissors in a live branch",
            format!(
                "{preamble}let bad (n:nat) : bot = match n with | Z[] -> %% | S[p] -> %%"
            ),
        ),
        (
            "non-value dependent application without a value witness",
            format!(
                "{preamble}let refl (n:nat) : (n == n) = %%\n\
                 let bad : (loop Z[] == loop Z[]) = refl (loop Z[])"
            ),
        ),
        (
            "equation about a non-terminating term",
            format!("{preamble}let bad : (loop Z[] == Z[]) = %%"),
        ),
        ("wrong constructor", format!("{preamble}let bad : nat = Q[]")),
        (
            "inequation without a contradiction",
            "let bad : (Z[] != Z[]) = fun e -> %%".into(),
        ),
        ("assert of a clash", "assert Z[] == S[Z[]]".into()),
    ];
    let mut failed_count = 0;
    for (label, src) in &probes {
        let module = elaborate_module(src, &budget);
        assert!(module.failed(), "pseudo-proof `{label}` was accepted");
        failed_count += 1;
    }

    // positive control: ✂ is accepted under a contradictory hypothesis
    let ok_src = "type nat = Z[] | S[nat]\n\
                  let fine (e : (Z[] == S[Z[]])) : bot = %%";
    let module = elaborate_module(ok_src, &budget);
    assert!(!module.failed(), "✂ under a contradictory hypothesis must check: {:?}", module.decls);
    let d = module.decls[1].derivation.as_ref().expect("derivation");
    assert!(d.rules_used().contains(&RuleTag::Scissors));

    // and an equation goal provable from the context does not use the ✂
    // rule (it elaborates through the restriction introduction)
    let eq_src = "type nat = Z[] | S[nat]\n\
                  let rec add n m = match n with | Z[] -> m | S[nn] -> S[add nn m]\n\
                  let ok n:nat : (add Z[] n == n) = %%";
    let module = elaborate_module(eq_src, &budget);
    assert!(!module.failed());
    let d = module.decls[2].derivation.as_ref().expect("derivation");
    assert!(
        !d.rules_used().contains(&RuleTag::Scissors),
        "equation goal must elaborate without the ✂ rule"
    );
    // its ✂ evidence is the decision procedure, recorded and replayable
    assert!(validate(&module.table, &budget, d));

    // the ✂ rule is gated on an actual contradiction
    let e = restrict_to_equational(&module.ctx);
    assert!(
        !svr_core::equivalence::context_contradictory(&e, &budget).is_proved(),
        "sanity: the intro context is not contradictory"
    );
    println!(
        "ACCEPTANCE 8 PASS: {failed_count} pseudo-proofs of ⊥ rejected, ✂ gated on \
         contradiction, equation goals use the restriction route"
    );
}
