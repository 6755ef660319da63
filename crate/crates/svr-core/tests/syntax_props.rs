//! Property tests for the binding laws: substitution against free
//! variables, identity substitutions, alpha-equivalence under renaming,
//! and the sugar encodings round-tripping through printer and parser.

use proptest::prelude::*;
use std::collections::BTreeMap;
use svr_core::surface::{desugar_formula_snippet, parse_formula_snippet};
use svr_core::syntax::{
    alpha_canonical_term, alpha_eq_term, free_vars_term, subst_term, Binding, Name, Term, Value,
};
use svr_core::types::{
    formula_alpha_eq, sugar_bot, sugar_equation, sugar_inequation, sugar_pi, sugar_top, Formula,
};

fn name_strategy() -> impl Strategy<Value = Name> {
    prop_oneof![Just(Name::new("x")), Just(Name::new("y")), Just(Name::new("z"))]
}

fn value_strategy() -> BoxedStrategy<Value> {
    let leaf = prop_oneof![name_strategy().prop_map(Value::Var), Just(Value::unit())];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (name_strategy(), term_strategy_from(inner.clone()))
                .prop_map(|(x, t)| Value::Lam(x, Box::new(t))),
            inner
                .clone()
                .prop_map(|v| Value::Ctor(Name::new("C"), Box::new(v))),
            inner.prop_map(|v| {
                let mut fs = BTreeMap::new();
                fs.insert(Name::new("l"), v);
                Value::Record(fs)
            }),
        ]
    })
    .boxed()
}

fn term_strategy_from(values: BoxedStrategy<Value>) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        values.clone().prop_map(Term::Val),
        Just(Term::TermVar(Name::new("a"))),
    ];
    leaf.prop_recursive(3, 24, 3, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(t, u)| Term::app(t, u)),
            (name_strategy(), inner.clone()).prop_map(|(x, t)| Term::lam(x.as_str(), t)),
            (values.clone(), inner).prop_map(|(v, t)| {
                let mut bs = BTreeMap::new();
                bs.insert(Name::new("C"), (Name::new("x"), t));
                Term::Case(Box::new(v), bs)
            }),
        ]
    })
    .boxed()
}

fn term_strategy() -> BoxedStrategy<Term> {
    term_strategy_from(value_strategy())
}

proptest! {
    /// FVλ(t[x := v]) = (FVλ(t) \ {x}) ∪ FVλ(v) when x is free in t,
    /// and substitution is the identity otherwise.
    #[test]
    fn subst_free_vars_law(t in term_strategy(), v in value_strategy()) {
        let x = Name::new("x");
        let before = free_vars_term(&t);
        let after = free_vars_term(&subst_term(&t, Binding::LambdaVar(x.clone(), v.clone())));
        if before.lambda.contains(&x) {
            let mut expected = before.lambda.clone();
            expected.remove(&x);
            expected.extend(free_vars_term(&Term::Val(v.clone())).lambda);
            prop_assert_eq!(after.lambda, expected);
        } else {
            // identity up to alpha (binders may still be freshened)
            let r = subst_term(&t, Binding::LambdaVar(x, v));
            prop_assert!(alpha_eq_term(&r, &t));
        }
    }

    /// Substituting a fresh variable for a term variable and back is the
    /// identity up to alpha.
    #[test]
    fn term_var_rename_roundtrip(t in term_strategy()) {
        let a = Name::new("a");
        let b = Name::new("fresh_b");
        let there = subst_term(&t, Binding::TermVar(a.clone(), Term::TermVar(b.clone())));
        let back = subst_term(&there, Binding::TermVar(b, Term::TermVar(a)));
        prop_assert!(alpha_eq_term(&back, &t));
    }

    /// Canonical renaming of all binders preserves alpha-equivalence.
    #[test]
    fn alpha_eq_stable_under_renaming(t in term_strategy()) {
        let canon = alpha_canonical_term(&t);
        prop_assert!(alpha_eq_term(&t, &canon));
        prop_assert!(alpha_eq_term(&canon, &t));
    }

    /// Alpha-equivalence is invariant under substitution of alpha-equal
    /// values.
    #[test]
    fn subst_respects_alpha(t in term_strategy()) {
        let v1 = Value::Lam(Name::new("p"), Box::new(Term::var("p")));
        let v2 = Value::Lam(Name::new("q"), Box::new(Term::var("q")));
        let x = Name::new("x");
        let r1 = subst_term(&t, Binding::LambdaVar(x.clone(), v1));
        let r2 = subst_term(&t, Binding::LambdaVar(x, v2));
        prop_assert!(alpha_eq_term(&r1, &r2));
    }
}

/// The sugar encodings print back to their sugared forms and re-parse to
/// the same encodings.
#[test]
fn sugar_roundtrips() {
    let z = Term::Val(Value::Ctor(Name::new("Z"), Box::new(Value::unit())));
    let sugars: Vec<Formula> = vec![
        sugar_bot(),
        sugar_top(),
        sugar_equation(z.clone(), z.clone()),
        sugar_inequation(z.clone(), z.clone()),
        sugar_pi(
            Name::new("n"),
            Formula::Named(Name::new("nat")),
            sugar_equation(Term::TermVar(Name::new("n")), Term::TermVar(Name::new("n"))),
        ),
    ];
    for f in sugars {
        let printed = f.to_string();
        let parsed = parse_formula_snippet(&printed)
            .unwrap_or_else(|d| panic!("`{printed}` does not parse: {}", d.render()));
        let resolved = desugar_formula_snippet(&printed, &parsed)
            .unwrap_or_else(|d| panic!("`{printed}` does not resolve: {d:?}"));
        assert!(
            formula_alpha_eq(&resolved, &f),
            "sugar does not round-trip:\n  original: {f}\n  reparsed: {resolved}"
        );
    }
}
