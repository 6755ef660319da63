//! The type checker: a syntax-directed elaborator for the second-order
//! system with both judgement forms (`⊩` on values, `⊢` on terms), the
//! equational discharge rules, and the semantical value restriction
//! (quantifier introduction and dependent elimination accept any term
//! provably equivalent to a value).
//!
//! Checking is hint-driven: quantifier eliminations take witnesses from
//! surface annotations, rewrites fire only inside the restriction macros
//! or where a `rewrite` hint names an equation. Every successful check
//! returns a [`Derivation`] that an independent validator replays.

mod ast;
mod check;
mod validate;

pub use ast::Ast;
pub use check::{apply_semantical_restriction, Checker};
pub use validate::validate;

use crate::equivalence::{Polarity, Verdict};
use crate::syntax::{Name, Term, Value};
use crate::types::{
    alpha_canonical_formula, formula_subst, Formula, FormulaBinding, PredicateDef, TypingContext,
};
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

/// Rule names of the type system and its extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RuleTag {
    /// `Γ, x : A ⊩ x : A`
    Ax,
    /// `⊩ v : A  ⟹  ⊢ v : A`
    Up,
    /// `⊢ v : A  ⟹  ⊩ v : A`
    Down,
    /// `⇒ᵢ`
    ArrowI,
    /// `⇒ₑ`
    ArrowE,
    /// `μ`
    Mu,
    /// `∗`
    Star,
    /// `∈ᵢ`
    MemberI,
    /// `∈ₑ` (left rule)
    MemberE,
    /// `↾ᵢ`
    RestrictI,
    /// `↾ₑ` (left rule)
    RestrictE,
    /// `∀ᵢ` over terms
    ForallTermI,
    /// `∀ₑ` over terms
    ForallTermE,
    /// `∃ᵢ` over terms
    ExistsTermI,
    /// `∃ₑ` over terms (left rule)
    ExistsTermE,
    /// `∀_I` over predicates
    ForallPredI,
    /// `∀_E` over predicates
    ForallPredE,
    /// `∃_I` over predicates
    ExistsPredI,
    /// `∃_E` over predicates (left rule)
    ExistsPredE,
    /// `×ᵢ`
    RecordI,
    /// `×ₑ`
    RecordE,
    /// `+ᵢ`
    VariantI,
    /// `+ₑ`
    VariantE,
    /// `≡ᵥ,ₗ`
    EquivVL,
    /// `≡ₜ,ₗ`
    EquivTL,
    /// `≡ᵥ,ᵣ`
    EquivVR,
    /// `≡ₜ,ᵣ`
    EquivTR,
    /// the `≡` discharge rule
    EquivDischarge,
    /// the `≢` discharge rule
    InequivDischarge,
    /// the `✂` rule
    Scissors,
    /// macro tag for the derived `∀ᵢ,≡`; transparent over its expansion
    MacroForallIEq,
    /// macro tag for the derived `Πₑ,≡`; transparent over its expansion
    MacroPiEEq,
    /// recursive definition marker; carries the totality assumption
    Rec,
}

impl RuleTag {
    pub fn is_primitive(self) -> bool {
        !matches!(self, RuleTag::MacroForallIEq | RuleTag::MacroPiEEq | RuleTag::Rec)
    }

    pub fn label(self) -> &'static str {
        match self {
            RuleTag::Ax => "ax",
            RuleTag::Up => "↑",
            RuleTag::Down => "↓",
            RuleTag::ArrowI => "⇒i",
            RuleTag::ArrowE => "⇒e",
            RuleTag::Mu => "μ",
            RuleTag::Star => "∗",
            RuleTag::MemberI => "∈i",
            RuleTag::MemberE => "∈e",
            RuleTag::RestrictI => "↾i",
            RuleTag::RestrictE => "↾e",
            RuleTag::ForallTermI => "∀i",
            RuleTag::ForallTermE => "∀e",
            RuleTag::ExistsTermI => "∃i",
            RuleTag::ExistsTermE => "∃e",
            RuleTag::ForallPredI => "∀I",
            RuleTag::ForallPredE => "∀E",
            RuleTag::ExistsPredI => "∃I",
            RuleTag::ExistsPredE => "∃E",
            RuleTag::RecordI => "×i",
            RuleTag::RecordE => "×e",
            RuleTag::VariantI => "+i",
            RuleTag::VariantE => "+e",
            RuleTag::EquivVL => "≡v,l",
            RuleTag::EquivTL => "≡t,l",
            RuleTag::EquivVR => "≡v,r",
            RuleTag::EquivTR => "≡t,r",
            RuleTag::EquivDischarge => "≡",
            RuleTag::InequivDischarge => "≢",
            RuleTag::Scissors => "✂",
            RuleTag::MacroForallIEq => "∀i,≡",
            RuleTag::MacroPiEEq => "Πe,≡",
            RuleTag::Rec => "rec",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum JudgementKind {
    /// `Γ ⊩ v : A`
    Value,
    /// `Γ ⊢ t : A`
    Term,
}

#[derive(Clone, Debug)]
pub struct Judgement {
    pub kind: JudgementKind,
    pub context: TypingContext,
    pub subject: Term,
    pub formula: Formula,
}

impl Judgement {
    pub fn value(context: TypingContext, v: Value, formula: Formula) -> Judgement {
        Judgement { kind: JudgementKind::Value, context, subject: Term::Val(v), formula }
    }

    pub fn term(context: TypingContext, subject: Term, formula: Formula) -> Judgement {
        Judgement { kind: JudgementKind::Term, context, subject, formula }
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let turnstile = match self.kind {
            JudgementKind::Value => "⊩",
            JudgementKind::Term => "⊢",
        };
        write!(f, "{} {} {} : {}", self.context, turnstile, self.subject, self.formula)
    }
}

/// Recorded evidence for a rule's side conditions, re-verified by the
/// validator.
#[derive(Clone, Debug)]
pub enum SideCondition {
    /// A freshly chosen variable that must not occur in the context.
    Freshness(Name),
    /// A claim handed to the decision procedure, with its verdict.
    Equivalence { lhs: Term, rhs: Term, polarity: Polarity, verdict: Verdict },
    /// The witness of a term-quantifier rule.
    TermWitness(Term),
    /// The witness of a predicate-quantifier rule.
    PredWitness(PredicateDef),
    /// Rewrite pattern for the `≡` rules acting on the subject:
    /// `pattern[var := from]` is the premise subject and
    /// `pattern[var := to]` the conclusion subject.
    SubjectPattern { pattern: Term, var: Name, from: Term, to: Term },
    /// Rewrite pattern for the `≡` rules acting on the formula.
    FormulaPattern { pattern: Formula, var: Name, from: Term, to: Term },
    /// Evidence that the equational content of the context derives ⊥.
    ContextContradictory { verdict: Verdict },
    /// The totality assumption of a recursive definition.
    AssumesTotality,
}

/// A derivation tree. Replayable: every node carries its full judgement
/// and the evidence for its side conditions.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: RuleTag,
    pub conclusion: Judgement,
    pub premises: Vec<Derivation>,
    pub side: Vec<SideCondition>,
}

impl Derivation {
    pub fn new(rule: RuleTag, conclusion: Judgement) -> Derivation {
        Derivation { rule, conclusion, premises: Vec::new(), side: Vec::new() }
    }

    pub fn with(
        rule: RuleTag,
        conclusion: Judgement,
        premises: Vec<Derivation>,
        side: Vec<SideCondition>,
    ) -> Derivation {
        Derivation { rule, conclusion, premises, side }
    }

    /// Every rule tag used in this tree.
    pub fn rules_used(&self) -> Vec<RuleTag> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules(&self, out: &mut Vec<RuleTag>) {
        out.push(self.rule);
        for p in &self.premises {
            p.collect_rules(out);
        }
    }

    pub fn assumes_totality(&self) -> bool {
        self.rules_used().contains(&RuleTag::Rec)
    }

    /// JSON export: rule-tag tree with judgements pretty-printed.
    pub fn to_json(&self) -> serde_json::Value {
        let side: Vec<serde_json::Value> = self
            .side
            .iter()
            .map(|s| match s {
                SideCondition::Freshness(x) => serde_json::json!({"fresh": x.to_string()}),
                SideCondition::Equivalence { lhs, rhs, polarity, verdict } => serde_json::json!({
                    "claim": format!(
                        "{lhs} {} {rhs}",
                        if *polarity == Polarity::Equiv { "≡" } else { "≢" }
                    ),
                    "verdict": verdict,
                }),
                SideCondition::TermWitness(t) => {
                    serde_json::json!({"term-witness": t.to_string()})
                }
                SideCondition::PredWitness(def) => serde_json::json!({
                    "pred-witness": {
                        "params": def.params.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                        "body": def.body.to_string(),
                    }
                }),
                SideCondition::SubjectPattern { pattern, var, from, to } => serde_json::json!({
                    "subject-rewrite": {
                        "pattern": pattern.to_string(),
                        "var": var.to_string(),
                        "from": from.to_string(),
                        "to": to.to_string(),
                    }
                }),
                SideCondition::FormulaPattern { pattern, var, from, to } => serde_json::json!({
                    "formula-rewrite": {
                        "pattern": pattern.to_string(),
                        "var": var.to_string(),
                        "from": from.to_string(),
                        "to": to.to_string(),
                    }
                }),
                SideCondition::ContextContradictory { verdict } => {
                    serde_json::json!({"context-contradictory": verdict})
                }
                SideCondition::AssumesTotality => serde_json::json!("assumes-totality"),
            })
            .collect();
        serde_json::json!({
            "rule": self.rule.label(),
            "judgement": self.conclusion.to_string(),
            "side": side,
            "premises": self.premises.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Why a check failed.
#[derive(Clone, Debug)]
pub enum FailureReason {
    RuleMismatch(String),
    FreshnessViolation(String),
    /// Always carries the claim that was handed to the procedure.
    EquivalenceUnknown { lhs: Term, rhs: Term },
    ContextInvalid(String),
    AnnotationNeeded(String),
}

#[derive(Clone, Debug)]
pub struct CheckFailure {
    pub judgement: String,
    pub reason: FailureReason,
    pub sub: Option<Box<CheckFailure>>,
}

impl CheckFailure {
    pub fn new(judgement: String, reason: FailureReason) -> CheckFailure {
        CheckFailure { judgement, reason, sub: None }
    }

    pub fn because(judgement: String, reason: FailureReason, sub: CheckFailure) -> CheckFailure {
        CheckFailure { judgement, reason, sub: Some(Box::new(sub)) }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut cur = Some(self);
        let mut depth = 0;
        while let Some(f) = cur {
            for _ in 0..depth {
                out.push_str("  ");
            }
            out.push_str(&format!("{}: {}\n", f.judgement, f.describe_reason()));
            cur = f.sub.as_deref();
            depth += 1;
        }
        out
    }

    fn describe_reason(&self) -> String {
        match &self.reason {
            FailureReason::RuleMismatch(m) => format!("no rule applies ({m})"),
            FailureReason::FreshnessViolation(m) => format!("freshness violation ({m})"),
            FailureReason::EquivalenceUnknown { lhs, rhs } => {
                format!("equivalence unknown: {lhs} ≡ {rhs}")
            }
            FailureReason::ContextInvalid(m) => format!("invalid context ({m})"),
            FailureReason::AnnotationNeeded(m) => format!("annotation needed ({m})"),
        }
    }
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render().trim_end())
    }
}

/// Named-type definitions. Definitions are closed formulas; recursion
/// must be guarded by a variant or record former (checked at
/// registration).
#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    pub defs: BTreeMap<Name, Formula>,
}

#[derive(Clone, Debug)]
pub struct GuardError {
    pub name: Name,
    pub message: String,
}

impl fmt::Display for GuardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {}: {}", self.name, self.message)
    }
}

impl TypeTable {
    pub fn get(&self, n: &Name) -> Option<&Formula> {
        self.defs.get(n)
    }

    /// Register a definition, rejecting cycles that are not guarded by a
    /// variant or record former (those could never be unfolded finitely).
    pub fn register(&mut self, name: Name, body: Formula) -> Result<(), GuardError> {
        self.defs.insert(name.clone(), body);
        if self.has_unguarded_cycle(&name) {
            self.defs.remove(&name);
            return Err(GuardError {
                name,
                message: "recursive reference is not guarded by a variant or record".into(),
            });
        }
        Ok(())
    }

    /// Names referenced by `a` outside any variant/record former.
    fn unguarded_refs(a: &Formula, out: &mut Vec<Name>) {
        match a {
            Formula::Named(n) => out.push(n.clone()),
            Formula::Arrow(l, r) => {
                Self::unguarded_refs(l, out);
                Self::unguarded_refs(r, out);
            }
            Formula::ForallTerm(_, b)
            | Formula::ExistsTerm(_, b)
            | Formula::ForallPred(_, _, b)
            | Formula::ExistsPred(_, _, b)
            | Formula::Member(_, b) => Self::unguarded_refs(b, out),
            Formula::Restrict(b, _, _) => Self::unguarded_refs(b, out),
            // variant/record formers guard their contents
            Formula::RecordTy(_) | Formula::VariantTy(_) | Formula::PredApp(..) => {}
        }
    }

    fn has_unguarded_cycle(&self, start: &Name) -> bool {
        let mut stack = vec![start.clone()];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            if let Some(body) = self.defs.get(&n) {
                let mut refs = Vec::new();
                Self::unguarded_refs(body, &mut refs);
                for r in refs {
                    if &r == start {
                        return true;
                    }
                    stack.push(r);
                }
            }
        }
        false
    }

    /// Chase named references at the head, each definition at most a
    /// bounded number of times.
    pub fn head_unfold(&self, a: &Formula) -> Formula {
        let mut cur = a.clone();
        let mut steps = 0;
        while let Formula::Named(n) = &cur {
            match self.defs.get(n) {
                Some(b) if steps <= self.defs.len() => {
                    cur = b.clone();
                    steps += 1;
                }
                _ => break,
            }
        }
        cur
    }
}

/// Equality of formulas modulo alpha and named-type unfolding, decided
/// coinductively (a pair currently being compared is assumed equal, which
/// is sound for the regular trees produced by a guarded table).
pub fn formulas_match(table: &TypeTable, a: &Formula, b: &Formula) -> bool {
    fn go(table: &TypeTable, a: &Formula, b: &Formula, assumed: &mut HashSet<String>) -> bool {
        let ca = alpha_canonical_formula(a);
        let cb = alpha_canonical_formula(b);
        if ca == cb {
            return true;
        }
        let key = format!("{ca} ~~ {cb}");
        if !assumed.insert(key) {
            return true;
        }
        let a = table.head_unfold(a);
        let b = table.head_unfold(b);
        match (&a, &b) {
            (Formula::Named(x), Formula::Named(y)) => x == y,
            (Formula::PredApp(x, ts), Formula::PredApp(y, us)) => {
                x == y
                    && ts.len() == us.len()
                    && ts
                        .iter()
                        .zip(us)
                        .all(|(t, u)| crate::syntax::alpha_eq_term(t, u))
            }
            (Formula::Arrow(l1, r1), Formula::Arrow(l2, r2)) => {
                go(table, l1, l2, assumed) && go(table, r1, r2, assumed)
            }
            (Formula::ForallTerm(x, bx), Formula::ForallTerm(y, by))
            | (Formula::ExistsTerm(x, bx), Formula::ExistsTerm(y, by)) => {
                let fresh_var = crate::syntax::fresh(x);
                let bx = formula_subst(
                    bx,
                    &FormulaBinding::Term(x.clone(), Term::TermVar(fresh_var.clone())),
                );
                let by = formula_subst(
                    by,
                    &FormulaBinding::Term(y.clone(), Term::TermVar(fresh_var)),
                );
                match (bx, by) {
                    (Ok(bx), Ok(by)) => go(table, &bx, &by, assumed),
                    _ => false,
                }
            }
            (Formula::ForallPred(x, n, bx), Formula::ForallPred(y, m, by))
            | (Formula::ExistsPred(x, n, bx), Formula::ExistsPred(y, m, by)) => {
                if n != m {
                    return false;
                }
                // rename both bound predicate variables to a common one
                let fresh_pred = crate::syntax::fresh(x);
                let bx = rename_pred(bx, x, &fresh_pred);
                let by = rename_pred(by, y, &fresh_pred);
                go(table, &bx, &by, assumed)
            }
            (Formula::RecordTy(fs), Formula::RecordTy(gs)) => {
                fs.len() == gs.len()
                    && fs.iter().zip(gs).all(|((l1, a1), (l2, a2))| {
                        l1 == l2 && go(table, a1, a2, assumed)
                    })
            }
            (Formula::VariantTy(cs), Formula::VariantTy(ds)) => {
                cs.len() == ds.len()
                    && cs.iter().zip(ds).all(|((c1, a1), (c2, a2))| {
                        c1 == c2 && go(table, a1, a2, assumed)
                    })
            }
            (Formula::Member(t, a1), Formula::Member(u, b1)) => {
                crate::syntax::alpha_eq_term(t, u) && go(table, a1, b1, assumed)
            }
            (Formula::Restrict(a1, t1, u1), Formula::Restrict(b1, t2, u2)) => {
                crate::syntax::alpha_eq_term(t1, t2)
                    && crate::syntax::alpha_eq_term(u1, u2)
                    && go(table, a1, b1, assumed)
            }
            _ => false,
        }
    }
    go(table, a, b, &mut HashSet::new())
}

pub(crate) fn rename_pred(a: &Formula, from: &Name, to: &Name) -> Formula {
    // defined on types.rs's internals via substitution with a 0-ary
    // marker is not arity-polymorphic, so do it structurally here
    match a {
        Formula::PredApp(x, args) if x == from => Formula::PredApp(to.clone(), args.clone()),
        Formula::PredApp(..) | Formula::Named(_) => a.clone(),
        Formula::Arrow(l, r) => Formula::Arrow(
            Box::new(rename_pred(l, from, to)),
            Box::new(rename_pred(r, from, to)),
        ),
        Formula::ForallTerm(b, body) => {
            Formula::ForallTerm(b.clone(), Box::new(rename_pred(body, from, to)))
        }
        Formula::ExistsTerm(b, body) => {
            Formula::ExistsTerm(b.clone(), Box::new(rename_pred(body, from, to)))
        }
        Formula::ForallPred(x, n, body) if x != from => {
            Formula::ForallPred(x.clone(), *n, Box::new(rename_pred(body, from, to)))
        }
        Formula::ExistsPred(x, n, body) if x != from => {
            Formula::ExistsPred(x.clone(), *n, Box::new(rename_pred(body, from, to)))
        }
        Formula::ForallPred(..) | Formula::ExistsPred(..) => a.clone(),
        Formula::RecordTy(fs) => Formula::RecordTy(
            fs.iter().map(|(l, a)| (l.clone(), rename_pred(a, from, to))).collect(),
        ),
        Formula::VariantTy(cs) => Formula::VariantTy(
            cs.iter().map(|(c, a)| (c.clone(), rename_pred(a, from, to))).collect(),
        ),
        Formula::Member(t, a) => Formula::Member(t.clone(), Box::new(rename_pred(a, from, to))),
        Formula::Restrict(a, t, u) => {
            Formula::Restrict(Box::new(rename_pred(a, from, to)), t.clone(), u.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{sugar_top, unit_singleton};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn nat_table() -> TypeTable {
        let mut cs = BTreeMap::new();
        cs.insert(n("Z"), unit_singleton());
        cs.insert(n("S"), Formula::Named(n("nat")));
        let mut t = TypeTable::default();
        t.register(n("nat"), Formula::VariantTy(cs)).unwrap();
        t
    }

    #[test]
    fn guarded_recursion_accepted() {
        let _ = nat_table();
    }

    #[test]
    fn unguarded_cycle_rejected() {
        let mut t = TypeTable::default();
        assert!(t.register(n("t"), Formula::Named(n("t"))).is_err());
        // mutual unguarded cycle
        let mut t = TypeTable::default();
        t.register(n("a"), Formula::Named(n("b"))).unwrap();
        assert!(t.register(n("b"), Formula::Named(n("a"))).is_err());
    }

    #[test]
    fn named_matches_its_unfolding() {
        let t = nat_table();
        let nat = Formula::Named(n("nat"));
        let unfolded = t.head_unfold(&nat);
        assert!(formulas_match(&t, &nat, &unfolded));
        assert!(formulas_match(&t, &unfolded, &nat));
        // and a twice-unfolded version
        let mut cs = BTreeMap::new();
        cs.insert(n("Z"), unit_singleton());
        cs.insert(n("S"), unfolded.clone());
        let twice = Formula::VariantTy(cs);
        assert!(formulas_match(&t, &nat, &twice));
        assert!(!formulas_match(&t, &nat, &sugar_top()));
    }

    #[test]
    fn alias_chain_unfolds() {
        let mut t = TypeTable::default();
        t.register(n("a"), sugar_top()).unwrap();
        t.register(n("b"), Formula::Named(n("a"))).unwrap();
        assert!(formulas_match(&t, &Formula::Named(n("b")), &sugar_top()));
    }
}
