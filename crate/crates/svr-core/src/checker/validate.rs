//! Independent replay of derivations: every node is re-checked against
//! its rule schema, freshness side-conditions are recomputed, and every
//! recorded verdict is re-established by running the decision procedure
//! again. This shares only the basic syntax operations with the
//! elaborator, not its search strategy.

use crate::checker::{
    formulas_match, Derivation, Judgement, JudgementKind, RuleTag, SideCondition, TypeTable,
};
use crate::equivalence::{context_contradictory, decide, Budget, Polarity};
use crate::syntax::{alpha_eq_term, free_vars_term, Name, Term, Value};
use crate::types::{
    context_valid, formula_alpha_eq, formula_free_vars, formula_subst, restrict_to_equational,
    sugar_bot, ContextEntry, Formula, FormulaBinding, TypingContext,
};

pub struct Validator<'a> {
    table: &'a TypeTable,
    budget: Budget,
}

/// Replay a full derivation. The root context must be valid; every node
/// must instantiate its rule schema exactly.
pub fn validate(table: &TypeTable, budget: &Budget, d: &Derivation) -> bool {
    if context_valid(&d.conclusion.context).is_err() {
        return false;
    }
    Validator { table, budget: budget.clone() }.node(d)
}

fn entry_eq(a: &ContextEntry, b: &ContextEntry) -> bool {
    match (a, b) {
        (ContextEntry::LambdaHyp(x, f), ContextEntry::LambdaHyp(y, g))
        | (ContextEntry::StackHyp(x, f), ContextEntry::StackHyp(y, g)) => {
            x == y && formula_alpha_eq(f, g)
        }
        (ContextEntry::TermDecl(x), ContextEntry::TermDecl(y)) => x == y,
        (ContextEntry::PredDecl(x, n), ContextEntry::PredDecl(y, m)) => x == y && n == m,
        (ContextEntry::EquivHyp(t, u), ContextEntry::EquivHyp(t2, u2))
        | (ContextEntry::InequivHyp(t, u), ContextEntry::InequivHyp(t2, u2)) => {
            alpha_eq_term(t, t2) && alpha_eq_term(u, u2)
        }
        _ => false,
    }
}

fn ctx_eq(a: &TypingContext, b: &TypingContext) -> bool {
    a.entries.len() == b.entries.len()
        && a.entries.iter().zip(&b.entries).all(|(x, y)| entry_eq(x, y))
}

/// `b` is `a` extended with exactly `ext`.
fn ctx_extends(a: &TypingContext, b: &TypingContext, ext: &[ContextEntry]) -> bool {
    b.entries.len() == a.entries.len() + ext.len()
        && ctx_eq(a, &TypingContext { entries: b.entries[..a.entries.len()].to_vec() })
        && b.entries[a.entries.len()..]
            .iter()
            .zip(ext)
            .all(|(x, y)| entry_eq(x, y))
}

fn has_equation(ctx: &TypingContext, l: &Term, r: &Term) -> bool {
    ctx.entries.iter().any(|e| match e {
        ContextEntry::EquivHyp(t, u) => {
            (alpha_eq_term(t, l) && alpha_eq_term(u, r))
                || (alpha_eq_term(t, r) && alpha_eq_term(u, l))
        }
        _ => false,
    })
}

fn name_in_dom(ctx: &TypingContext, n: &Name) -> bool {
    ctx.entries.iter().any(|e| match e {
        ContextEntry::LambdaHyp(x, _)
        | ContextEntry::StackHyp(x, _)
        | ContextEntry::TermDecl(x)
        | ContextEntry::PredDecl(x, _) => x == n,
        _ => false,
    })
}

/// Per-namespace freshness of a name a rule is about to bind.
fn fresh_lambda(ctx: &TypingContext, n: &Name) -> bool {
    !ctx.entries
        .iter()
        .any(|e| matches!(e, ContextEntry::LambdaHyp(x, _) if x == n))
}

fn fresh_stack(ctx: &TypingContext, n: &Name) -> bool {
    !ctx.entries
        .iter()
        .any(|e| matches!(e, ContextEntry::StackHyp(x, _) if x == n))
}

impl Validator<'_> {
    fn matches(&self, a: &Formula, b: &Formula) -> bool {
        formulas_match(self.table, a, b)
    }

    fn node(&self, d: &Derivation) -> bool {
        self.schema(d) && d.premises.iter().all(|p| self.node(p))
    }

    fn one_premise<'b>(&self, d: &'b Derivation) -> Option<&'b Derivation> {
        (d.premises.len() == 1).then(|| &d.premises[0])
    }

    fn schema(&self, d: &Derivation) -> bool {
        let c = &d.conclusion;
        match d.rule {
            RuleTag::Ax => {
                if c.kind != JudgementKind::Value || !d.premises.is_empty() {
                    return false;
                }
                let Term::Val(Value::Var(x)) = &c.subject else { return false };
                match c.context.lambda_hyp(x) {
                    Some(a) => self.matches(a, &c.formula),
                    None => false,
                }
            }
            RuleTag::Up => {
                let Some(p) = self.one_premise(d) else { return false };
                c.kind == JudgementKind::Term
                    && p.conclusion.kind == JudgementKind::Value
                    && c.subject.is_value()
                    && self.same_judgement_body(c, &p.conclusion)
            }
            RuleTag::Down => {
                let Some(p) = self.one_premise(d) else { return false };
                c.kind == JudgementKind::Value
                    && p.conclusion.kind == JudgementKind::Term
                    && c.subject.is_value()
                    && self.same_judgement_body(c, &p.conclusion)
            }
            RuleTag::ArrowI => {
                let Some(p) = self.one_premise(d) else { return false };
                if c.kind != JudgementKind::Value || p.conclusion.kind != JudgementKind::Term {
                    return false;
                }
                let Term::Val(Value::Lam(x, body)) = &c.subject else { return false };
                let Formula::Arrow(dom, cod) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                if !fresh_lambda(&c.context, x) {
                    return false;
                }
                ctx_extends(
                    &c.context,
                    &p.conclusion.context,
                    &[ContextEntry::LambdaHyp(x.clone(), (*dom).clone())],
                ) && alpha_eq_term(&p.conclusion.subject, body)
                    && self.matches(&p.conclusion.formula, &cod)
            }
            RuleTag::ArrowE => {
                if d.premises.len() != 2 || c.kind != JudgementKind::Term {
                    return false;
                }
                let (pf, pa) = (&d.premises[0].conclusion, &d.premises[1].conclusion);
                let Term::App(f, u) = &c.subject else { return false };
                let Formula::Arrow(dom, cod) = self.table.head_unfold(&pf.formula) else {
                    return false;
                };
                ctx_eq(&c.context, &pf.context)
                    && ctx_eq(&c.context, &pa.context)
                    && alpha_eq_term(&pf.subject, f)
                    && alpha_eq_term(&pa.subject, u)
                    && self.matches(&pa.formula, &dom)
                    && self.matches(&cod, &c.formula)
            }
            RuleTag::Mu => {
                let Some(p) = self.one_premise(d) else { return false };
                let Term::Mu(al, body) = &c.subject else { return false };
                if !fresh_stack(&c.context, al) {
                    return false;
                }
                ctx_extends(
                    &c.context,
                    &p.conclusion.context,
                    &[ContextEntry::StackHyp(al.clone(), c.formula.clone())],
                ) && alpha_eq_term(&p.conclusion.subject, body)
                    && self.matches(&p.conclusion.formula, &c.formula)
            }
            RuleTag::Star => {
                let Some(p) = self.one_premise(d) else { return false };
                let Term::Proc(proc) = &c.subject else { return false };
                let crate::syntax::Stack::Var(al) = &proc.stack else { return false };
                let Some(b) = c.context.stack_hyp(al) else { return false };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &proc.term)
                    && self.matches(&p.conclusion.formula, b)
            }
            RuleTag::MemberI => {
                let Some(p) = self.one_premise(d) else { return false };
                if c.kind != JudgementKind::Value || p.conclusion.kind != JudgementKind::Value {
                    return false;
                }
                let Formula::Member(t, b) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&t, &c.subject)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &b)
            }
            RuleTag::MemberE | RuleTag::RestrictE | RuleTag::ExistsTermE
            | RuleTag::ExistsPredE => self.left_rule(d),
            RuleTag::RestrictI => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::Restrict(b, t, u) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                has_equation(&c.context, &t, &u)
                    && ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &b)
            }
            RuleTag::ForallTermI => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ForallTerm(a, body) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                let Some(SideCondition::Freshness(a2)) = d.side.first() else { return false };
                if name_in_dom(&c.context, a2) || c.context.free_vars().term.contains(a2) {
                    return false;
                }
                let Ok(inst) = formula_subst(
                    &body,
                    &FormulaBinding::Term(a, Term::TermVar(a2.clone())),
                ) else {
                    return false;
                };
                ctx_extends(
                    &c.context,
                    &p.conclusion.context,
                    &[ContextEntry::TermDecl(a2.clone())],
                ) && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && p.conclusion.kind == JudgementKind::Value
                    && c.kind == JudgementKind::Value
                    && self.matches(&p.conclusion.formula, &inst)
            }
            RuleTag::ForallPredI => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ForallPred(x, n, body) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                let Some(SideCondition::Freshness(x2)) = d.side.first() else { return false };
                if name_in_dom(&c.context, x2) || c.context.free_vars().pred.contains(x2) {
                    return false;
                }
                let inst = crate::checker::rename_pred(&body, &x, x2);
                ctx_extends(
                    &c.context,
                    &p.conclusion.context,
                    &[ContextEntry::PredDecl(x2.clone(), n)],
                ) && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &inst)
            }
            RuleTag::ForallTermE => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ForallTerm(a, body) =
                    self.table.head_unfold(&p.conclusion.formula)
                else {
                    return false;
                };
                let Some(SideCondition::TermWitness(u)) = d.side.first() else { return false };
                if !self.witness_scoped(&c.context, u) {
                    return false;
                }
                let Ok(inst) = formula_subst(&body, &FormulaBinding::Term(a, u.clone())) else {
                    return false;
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&inst, &c.formula)
            }
            RuleTag::ExistsTermI => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ExistsTerm(a, body) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                let Some(SideCondition::TermWitness(u)) = d.side.first() else { return false };
                let Ok(inst) = formula_subst(&body, &FormulaBinding::Term(a, u.clone())) else {
                    return false;
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &inst)
            }
            RuleTag::ForallPredE => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ForallPred(x, n, body) =
                    self.table.head_unfold(&p.conclusion.formula)
                else {
                    return false;
                };
                let Some(SideCondition::PredWitness(def)) = d.side.first() else { return false };
                if def.arity() != n {
                    return false;
                }
                let Ok(inst) = formula_subst(&body, &FormulaBinding::Pred(x, def.clone()))
                else {
                    return false;
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&inst, &c.formula)
            }
            RuleTag::ExistsPredI => {
                let Some(p) = self.one_premise(d) else { return false };
                let Formula::ExistsPred(x, n, body) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                let Some(SideCondition::PredWitness(def)) = d.side.first() else { return false };
                if def.arity() != n {
                    return false;
                }
                let Ok(inst) = formula_subst(&body, &FormulaBinding::Pred(x, def.clone()))
                else {
                    return false;
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &inst)
            }
            RuleTag::RecordI => {
                if c.kind != JudgementKind::Value {
                    return false;
                }
                let Term::Val(Value::Record(fields)) = &c.subject else { return false };
                let Formula::RecordTy(tys) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                if fields.keys().collect::<Vec<_>>() != tys.keys().collect::<Vec<_>>()
                    || d.premises.len() != fields.len()
                {
                    return false;
                }
                fields.iter().zip(tys.values()).zip(&d.premises).all(
                    |(((_, v), ty), p)| {
                        ctx_eq(&c.context, &p.conclusion.context)
                            && p.conclusion.kind == JudgementKind::Value
                            && alpha_eq_term(&p.conclusion.subject, &Term::Val(v.clone()))
                            && self.matches(&p.conclusion.formula, ty)
                    },
                )
            }
            RuleTag::RecordE => {
                let Some(p) = self.one_premise(d) else { return false };
                let Term::Proj(v, l) = &c.subject else { return false };
                let Formula::RecordTy(tys) = self.table.head_unfold(&p.conclusion.formula)
                else {
                    return false;
                };
                let Some(field_ty) = tys.get(l) else { return false };
                ctx_eq(&c.context, &p.conclusion.context)
                    && p.conclusion.kind == JudgementKind::Value
                    && alpha_eq_term(&p.conclusion.subject, &Term::Val((**v).clone()))
                    && self.matches(field_ty, &c.formula)
            }
            RuleTag::VariantI => {
                let Some(p) = self.one_premise(d) else { return false };
                if c.kind != JudgementKind::Value {
                    return false;
                }
                let Term::Val(Value::Ctor(ctor, payload)) = &c.subject else { return false };
                let Formula::VariantTy(cs) = self.table.head_unfold(&c.formula) else {
                    return false;
                };
                let Some(pay_ty) = cs.get(ctor) else { return false };
                ctx_eq(&c.context, &p.conclusion.context)
                    && p.conclusion.kind == JudgementKind::Value
                    && alpha_eq_term(&p.conclusion.subject, &Term::Val((**payload).clone()))
                    && self.matches(&p.conclusion.formula, pay_ty)
            }
            RuleTag::VariantE => {
                let Term::Case(v, branches) = &c.subject else { return false };
                if d.premises.is_empty() {
                    return false;
                }
                let p0 = &d.premises[0].conclusion;
                let Formula::VariantTy(cs) = self.table.head_unfold(&p0.formula) else {
                    return false;
                };
                if cs.keys().collect::<Vec<_>>() != branches.keys().collect::<Vec<_>>()
                    || d.premises.len() != 1 + branches.len()
                {
                    return false;
                }
                if !(ctx_eq(&c.context, &p0.context)
                    && p0.kind == JudgementKind::Value
                    && alpha_eq_term(&p0.subject, &Term::Val((**v).clone())))
                {
                    return false;
                }
                branches.iter().zip(cs.values()).zip(&d.premises[1..]).all(
                    |(((ctor, (x, body)), pay_ty), p)| {
                        if !fresh_lambda(&c.context, x) {
                            return false;
                        }
                        let eq = ContextEntry::EquivHyp(
                            Term::Val(Value::Ctor(ctor.clone(), Box::new(Value::Var(x.clone())))),
                            Term::Val((**v).clone()),
                        );
                        ctx_extends(
                            &c.context,
                            &p.conclusion.context,
                            &[ContextEntry::LambdaHyp(x.clone(), pay_ty.clone()), eq],
                        ) && alpha_eq_term(&p.conclusion.subject, body)
                            && self.matches(&p.conclusion.formula, &c.formula)
                    },
                )
            }
            RuleTag::EquivTL | RuleTag::EquivVL => {
                let Some(p) = self.one_premise(d) else { return false };
                let Some(SideCondition::SubjectPattern { pattern, var, from, to }) =
                    d.side.first()
                else {
                    return false;
                };
                let apply = |target: &Term| {
                    crate::syntax::subst_term(
                        pattern,
                        crate::syntax::Binding::TermVar(var.clone(), target.clone()),
                    )
                };
                ctx_eq(&c.context, &p.conclusion.context)
                    && has_equation(&c.context, from, to)
                    && alpha_eq_term(&apply(from), &p.conclusion.subject)
                    && alpha_eq_term(&apply(to), &c.subject)
                    && self.matches(&p.conclusion.formula, &c.formula)
            }
            RuleTag::EquivTR | RuleTag::EquivVR => {
                let Some(p) = self.one_premise(d) else { return false };
                let Some(SideCondition::FormulaPattern { pattern, var, from, to }) =
                    d.side.first()
                else {
                    return false;
                };
                let apply = |target: &Term| {
                    formula_subst(pattern, &FormulaBinding::Term(var.clone(), target.clone()))
                };
                let (Ok(prem_f), Ok(conc_f)) = (apply(from), apply(to)) else { return false };
                ctx_eq(&c.context, &p.conclusion.context)
                    && has_equation(&c.context, from, to)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&prem_f, &p.conclusion.formula)
                    && self.matches(&conc_f, &c.formula)
            }
            RuleTag::EquivDischarge | RuleTag::InequivDischarge => {
                let Some(p) = self.one_premise(d) else { return false };
                let Some(SideCondition::Equivalence { lhs, rhs, polarity, verdict }) =
                    d.side.first()
                else {
                    return false;
                };
                if !verdict.is_proved() {
                    return false;
                }
                let expected_polarity = match d.rule {
                    RuleTag::EquivDischarge => Polarity::Equiv,
                    _ => Polarity::Inequiv,
                };
                if *polarity != expected_polarity {
                    return false;
                }
                let entry = match expected_polarity {
                    Polarity::Equiv => ContextEntry::EquivHyp(lhs.clone(), rhs.clone()),
                    Polarity::Inequiv => ContextEntry::InequivHyp(lhs.clone(), rhs.clone()),
                };
                if !ctx_extends(&c.context, &p.conclusion.context, &[entry]) {
                    return false;
                }
                if !(alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &c.formula))
                {
                    return false;
                }
                // replay the decision procedure
                let e = restrict_to_equational(&c.context);
                decide(&e, lhs, rhs, expected_polarity, &self.budget).is_proved()
            }
            RuleTag::Scissors => {
                if c.kind != JudgementKind::Value || !d.premises.is_empty() {
                    return false;
                }
                if !matches!(&c.subject, Term::Val(Value::Scissors)) {
                    return false;
                }
                if !self.matches(&c.formula, &sugar_bot()) {
                    return false;
                }
                let Some(SideCondition::ContextContradictory { verdict }) = d.side.first()
                else {
                    return false;
                };
                if !verdict.is_proved() {
                    return false;
                }
                let e = restrict_to_equational(&c.context);
                context_contradictory(&e, &self.budget).is_proved()
            }
            RuleTag::Rec => {
                let Some(p) = self.one_premise(d) else { return false };
                let has_flag =
                    d.side.iter().any(|s| matches!(s, SideCondition::AssumesTotality));
                has_flag
                    && ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &c.formula)
            }
            RuleTag::MacroForallIEq | RuleTag::MacroPiEEq => {
                let Some(p) = self.one_premise(d) else { return false };
                ctx_eq(&c.context, &p.conclusion.context)
                    && alpha_eq_term(&p.conclusion.subject, &c.subject)
                    && self.matches(&p.conclusion.formula, &c.formula)
            }
        }
    }

    fn same_judgement_body(&self, a: &Judgement, b: &Judgement) -> bool {
        ctx_eq(&a.context, &b.context)
            && alpha_eq_term(&a.subject, &b.subject)
            && self.matches(&a.formula, &b.formula)
    }

    /// Left rules: the premise context is the conclusion context with one
    /// entry expanded in place.
    fn left_rule(&self, d: &Derivation) -> bool {
        let Some(p) = self.one_premise(d) else { return false };
        let c = &d.conclusion;
        if !(alpha_eq_term(&p.conclusion.subject, &c.subject)
            && self.matches(&p.conclusion.formula, &c.formula))
        {
            return false;
        }
        let before = &c.context.entries;
        let after = &p.conclusion.context.entries;
        if after.len() != before.len() + 1 {
            return false;
        }
        // locate the expansion position
        let mut pos = 0;
        while pos < before.len() && entry_eq(&before[pos], &after[pos]) {
            pos += 1;
        }
        if pos >= before.len() {
            return false;
        }
        // suffix after the two expansion slots must agree
        if before[pos + 1..].len() != after[pos + 2..].len()
            || !before[pos + 1..]
                .iter()
                .zip(&after[pos + 2..])
                .all(|(x, y)| entry_eq(x, y))
        {
            return false;
        }
        let ContextEntry::LambdaHyp(y, hyp) = &before[pos] else { return false };
        let (e1, e2) = (&after[pos], &after[pos + 1]);
        match (d.rule, self.table.head_unfold(hyp)) {
            (RuleTag::MemberE, Formula::Member(u, b)) => {
                entry_eq(e1, &ContextEntry::LambdaHyp(y.clone(), (*b).clone()))
                    && entry_eq(
                        e2,
                        &ContextEntry::EquivHyp(Term::Val(Value::Var(y.clone())), (*u).clone()),
                    )
            }
            (RuleTag::RestrictE, Formula::Restrict(b, t, u)) => {
                entry_eq(e1, &ContextEntry::LambdaHyp(y.clone(), (*b).clone()))
                    && entry_eq(e2, &ContextEntry::EquivHyp((*t).clone(), (*u).clone()))
            }
            (RuleTag::ExistsTermE, Formula::ExistsTerm(a, b)) => {
                let Some(SideCondition::Freshness(a2)) = d.side.first() else { return false };
                // a ∉ FV(Γ, B) ∪ TV(t)
                let outer = TypingContext { entries: before.clone() };
                if name_in_dom(&outer, a2)
                    || outer.free_vars().term.contains(a2)
                    || formula_free_vars(&c.formula).term.contains(a2)
                    || free_vars_term(&c.subject).term.contains(a2)
                {
                    return false;
                }
                let Ok(inst) =
                    formula_subst(&b, &FormulaBinding::Term(a, Term::TermVar(a2.clone())))
                else {
                    return false;
                };
                entry_eq(e1, &ContextEntry::TermDecl(a2.clone()))
                    && entry_eq(e2, &ContextEntry::LambdaHyp(y.clone(), inst))
            }
            (RuleTag::ExistsPredE, Formula::ExistsPred(x, n, b)) => {
                let Some(SideCondition::Freshness(x2)) = d.side.first() else { return false };
                let outer = TypingContext { entries: before.clone() };
                if name_in_dom(&outer, x2)
                    || outer.free_vars().pred.contains(x2)
                    || formula_free_vars(&c.formula).pred.contains(x2)
                {
                    return false;
                }
                let inst = crate::checker::rename_pred(&b, &x, x2);
                entry_eq(e1, &ContextEntry::PredDecl(x2.clone(), n))
                    && entry_eq(e2, &ContextEntry::LambdaHyp(y.clone(), inst))
            }
            _ => false,
        }
    }

    fn witness_scoped(&self, ctx: &TypingContext, u: &Term) -> bool {
        let fv = free_vars_term(u);
        let in_dom = |n: &Name| {
            ctx.entries.iter().any(|e| match e {
                ContextEntry::LambdaHyp(x, _) => x == n,
                _ => false,
            })
        };
        let term_declared = |n: &Name| ctx.declares_term_var(n);
        let mu_declared = |n: &Name| {
            ctx.entries
                .iter()
                .any(|e| matches!(e, ContextEntry::StackHyp(x, _) if x == n))
        };
        fv.lambda.iter().all(in_dom)
            && fv.term.iter().all(term_declared)
            && fv.mu.iter().all(mu_declared)
    }
}
