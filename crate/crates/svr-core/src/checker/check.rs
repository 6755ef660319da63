//! The elaborating checker. Checking is directed by the subject and the
//! goal formula; every success yields both a derivation and the
//! elaborated core term (hints erased, `✂` holes discharged).
//!
//! Hypotheses are saturated with the left rules as they enter the
//! context: `x : u ∈ A` becomes `x : A, x ≡ u`, a restriction hypothesis
//! releases its equation, and an existential opens its witness. That is
//! how a pattern branch over a constructor declared `C[]` learns that its
//! payload is the empty record.

use crate::checker::ast::Ast;
use crate::checker::{
    formulas_match, CheckFailure, Derivation, FailureReason, Judgement, RuleTag,
    SideCondition, TypeTable,
};
use crate::equivalence::{
    context_contradictory, decide, find_equivalent_value, normalize, Budget, EquationalContext,
    Polarity, Verdict,
};
use crate::syntax::{
    alpha_eq_term, free_vars_term, fresh, subst_term, Binding, Name, Term, Value,
};
use crate::types::{
    context_valid, formula_free_vars, formula_subst, restrict_to_equational, ContextEntry,
    Formula, FormulaBinding, PredicateDef, TypingContext,
};
use std::collections::BTreeMap;

pub struct Checker<'a> {
    pub table: &'a TypeTable,
    pub budget: Budget,
}

type Checked = Result<(Derivation, Term), CheckFailure>;
type Inferred = Result<(Derivation, Formula, Term), CheckFailure>;

impl<'a> Checker<'a> {
    pub fn new(table: &'a TypeTable, budget: Budget) -> Checker<'a> {
        Checker { table, budget }
    }

    fn ectx(&self, ctx: &TypingContext) -> EquationalContext {
        restrict_to_equational(ctx)
    }

    fn matches(&self, a: &Formula, b: &Formula) -> bool {
        formulas_match(self.table, a, b)
    }

    fn fail(ctx: &TypingContext, subject: &str, goal: &Formula, reason: FailureReason) -> CheckFailure {
        CheckFailure::new(format!("{ctx} ⊢ {subject} : {goal}"), reason)
    }

    /// Entry point used by drivers: validates the context first.
    pub fn check_term_toplevel(&self, ctx: &TypingContext, ast: &Ast, goal: &Formula) -> Checked {
        if let Err(e) = context_valid(ctx) {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ _ : {goal}"),
                FailureReason::ContextInvalid(e.to_string()),
            ));
        }
        self.check_term(ctx, ast, goal)
    }

    // ------------------------------------------------------------------
    // Term judgements.

    pub fn check_term(&self, ctx: &TypingContext, ast: &Ast, goal: &Formula) -> Checked {
        match ast {
            Ast::Scissors => self.check_scissors(ctx, goal),
            Ast::WitnessTerm(e, u) => self.check_with_term_witness(ctx, e, u, goal),
            Ast::WitnessPred(e, p) => self.check_with_pred_witness(ctx, e, p, goal),
            Ast::RewriteHint(e, t, u) => self.check_with_rewrite(ctx, e, t, u, goal),
            Ast::Core(t) => match ast_of_term(t) {
                Some(inner) => self.check_term(ctx, &inner, goal),
                None => Err(Self::fail(
                    ctx,
                    &t.to_string(),
                    goal,
                    FailureReason::RuleMismatch("internal term form is not checkable".into()),
                )),
            },
            _ if ast.is_value_form() => {
                let (d, v) = self.check_value(ctx, ast, goal)?;
                let term = Term::Val(v);
                let up = Derivation::with(
                    RuleTag::Up,
                    Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                    vec![d],
                    vec![],
                );
                Ok((up, term))
            }
            Ast::App(f, a) => self.check_app(ctx, f, a, goal),
            Ast::Mu(al, body) => {
                let (al, body) = if ctx.stack_hyp(al).is_some() {
                    let al2 = fresh(al);
                    (al2.clone(), rename_mu(body, al, &al2))
                } else {
                    (al.clone(), (**body).clone())
                };
                let ctx2 = ctx.extended(ContextEntry::StackHyp(al.clone(), goal.clone()));
                let (d, core) = self.check_term(&ctx2, &body, goal)?;
                let term = Term::Mu(al, Box::new(core));
                Ok((
                    Derivation::with(
                        RuleTag::Mu,
                        Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                        vec![d],
                        vec![],
                    ),
                    term,
                ))
            }
            Ast::Restart(e, al) => {
                let Some(b) = ctx.stack_hyp(al).cloned() else {
                    return Err(Self::fail(
                        ctx,
                        "_ ∗ _",
                        goal,
                        FailureReason::RuleMismatch(format!("no stack hypothesis for {al}")),
                    ));
                };
                let (d, core) = self.check_term(ctx, e, &b)?;
                let term = Term::Proc(Box::new(crate::syntax::Process::new(
                    core,
                    crate::syntax::Stack::Var(al.clone()),
                )));
                Ok((
                    Derivation::with(
                        RuleTag::Star,
                        Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                        vec![d],
                        vec![],
                    ),
                    term,
                ))
            }
            Ast::Case(scrut, branches) => self.check_case(ctx, scrut, branches, goal),
            Ast::Proj(scrut, label) => {
                let (d, a, core) = self.infer_proj(ctx, scrut, label)?;
                if self.matches(&a, goal) {
                    Ok((d, core))
                } else {
                    Err(Self::fail(
                        ctx,
                        &core.to_string(),
                        goal,
                        FailureReason::RuleMismatch(format!("projection has type {a}")),
                    ))
                }
            }
            other => Err(Self::fail(
                ctx,
                "_",
                goal,
                FailureReason::RuleMismatch(format!("subject {other:?} has no checking rule")),
            )),
        }
    }

    fn check_app(&self, ctx: &TypingContext, f: &Ast, a: &Ast, goal: &Formula) -> Checked {
        // let-redex: (λx t) u checks t under a hypothesis inferred for u
        if let Ast::Lam(..) = f {
            let (d_a, arg_ty, a_core) = self.infer(ctx, a)?;
            let fun_ty = Formula::Arrow(Box::new(arg_ty), Box::new(goal.clone()));
            let (d_f, f_core) = self.check_term(ctx, f, &fun_ty)?;
            let term = Term::app(f_core, a_core);
            return Ok((
                Derivation::with(
                    RuleTag::ArrowE,
                    Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                    vec![d_f, d_a],
                    vec![],
                ),
                term,
            ));
        }
        let (d_f, f_ty, _) = self.infer(ctx, f)?;
        let f_ty = self.table.head_unfold(&f_ty);
        if let Formula::Arrow(dom, cod) = &f_ty {
            let (d_a, a_core) = self.check_term(ctx, a, dom)?;
            if !self.matches(cod, goal) {
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::RuleMismatch(format!("application produces {cod}")),
                ));
            }
            let term = Term::app(d_a_core(&d_f), a_core);
            return Ok((
                Derivation::with(
                    RuleTag::ArrowE,
                    Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                    vec![d_f, d_a],
                    vec![],
                ),
                term,
            ));
        }
        if f_ty.as_pi().is_some() {
            let (d, result, core) = self.pi_apply(ctx, f, d_f, &f_ty, a)?;
            if !self.matches(&result, goal) {
                return Err(Self::fail(
                    ctx,
                    &core.to_string(),
                    goal,
                    FailureReason::RuleMismatch(format!("application produces {result}")),
                ));
            }
            return Ok((d, core));
        }
        Err(Self::fail(
            ctx,
            "_",
            goal,
            FailureReason::AnnotationNeeded(format!(
                "cannot apply a term of type {f_ty}; a quantifier witness may be required"
            )),
        ))
    }

    // ------------------------------------------------------------------
    // Value judgements.

    pub fn check_value(&self, ctx: &TypingContext, ast: &Ast, goal: &Formula) -> Result<(Derivation, Value), CheckFailure> {
        let goal_unfolded = self.table.head_unfold(goal);

        if let Ast::Scissors = ast {
            let (d, term) = self.check_scissors(ctx, goal)?;
            let down = Derivation::with(
                RuleTag::Down,
                Judgement::value(ctx.clone(), term_value(&term), goal.clone()),
                vec![d],
                vec![],
            );
            return Ok((down, term_value_owned(term)));
        }

        match &goal_unfolded {
            Formula::ForallTerm(a, body) => {
                let a2 = self.fresh_term_decl(ctx, a);
                let body = formula_subst(
                    body,
                    &FormulaBinding::Term(a.clone(), Term::TermVar(a2.clone())),
                )
                .map_err(|e| {
                    Self::fail(ctx, "_", goal, FailureReason::RuleMismatch(e.to_string()))
                })?;
                let ctx2 = ctx.extended(ContextEntry::TermDecl(a2.clone()));
                let (d, v) = self.check_value(&ctx2, ast, &body)?;
                return Ok((
                    Derivation::with(
                        RuleTag::ForallTermI,
                        Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                        vec![d],
                        vec![SideCondition::Freshness(a2)],
                    ),
                    v,
                ));
            }
            Formula::ForallPred(x, n, body) => {
                let x2 = self.fresh_pred_decl(ctx, x);
                let body = rename_pred_in(body, x, &x2);
                let ctx2 = ctx.extended(ContextEntry::PredDecl(x2.clone(), *n));
                let (d, v) = self.check_value(&ctx2, ast, &body)?;
                return Ok((
                    Derivation::with(
                        RuleTag::ForallPredI,
                        Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                        vec![d],
                        vec![SideCondition::Freshness(x2)],
                    ),
                    v,
                ));
            }
            Formula::Member(t, b) => return self.check_member(ctx, ast, t, b, goal),
            Formula::Restrict(b, t, u) => {
                return self.check_restricted_value(ctx, ast, b, t, u, goal)
            }
            Formula::ExistsPred(..) if goal_unfolded.is_top() => {
                let (d, v) = self.check_value_top(ctx, ast, goal)?;
                return Ok((d, v));
            }
            Formula::ExistsTerm(a, body) => {
                if let Ast::WitnessTerm(e, u) = ast {
                    let inst = formula_subst(body, &FormulaBinding::Term(a.clone(), u.clone()))
                        .map_err(|e| {
                            Self::fail(ctx, "_", goal, FailureReason::RuleMismatch(e.to_string()))
                        })?;
                    let (d, v) = self.check_value(ctx, e, &inst)?;
                    return Ok((
                        Derivation::with(
                            RuleTag::ExistsTermI,
                            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                            vec![d],
                            vec![SideCondition::TermWitness(u.clone())],
                        ),
                        v,
                    ));
                }
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::AnnotationNeeded("existential goal needs a witness".into()),
                ));
            }
            Formula::ExistsPred(x, _, body) => {
                if let Ast::WitnessPred(e, p) = ast {
                    let inst =
                        formula_subst(body, &FormulaBinding::Pred(x.clone(), p.clone()))
                            .map_err(|e| {
                                Self::fail(
                                    ctx,
                                    "_",
                                    goal,
                                    FailureReason::RuleMismatch(e.to_string()),
                                )
                            })?;
                    let (d, v) = self.check_value(ctx, e, &inst)?;
                    return Ok((
                        Derivation::with(
                            RuleTag::ExistsPredI,
                            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                            vec![d],
                            vec![SideCondition::PredWitness(p.clone())],
                        ),
                        v,
                    ));
                }
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::AnnotationNeeded(
                        "existential predicate goal needs a witness".into(),
                    ),
                ));
            }
            _ => {}
        }

        match ast {
            Ast::WitnessTerm(e, _) | Ast::WitnessPred(e, _) => {
                // witness without a quantifier goal: ignore the hint
                self.check_value(ctx, e, goal)
            }
            Ast::RewriteHint(..) => {
                let (d, t) = self.check_term(ctx, ast, goal)?;
                let v = term_value_owned(t);
                Ok((
                    Derivation::with(
                        RuleTag::Down,
                        Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                        vec![d],
                        vec![],
                    ),
                    v,
                ))
            }
            Ast::Var(x) => self.check_var(ctx, x, goal),
            Ast::Lam(x, body) => match &goal_unfolded {
                Formula::Arrow(dom, cod) => {
                    let (x, body) = if ctx.lambda_hyp(x).is_some() {
                        let x2 = fresh(x);
                        (x2.clone(), rename_lambda(body, x, &x2))
                    } else {
                        (x.clone(), (**body).clone())
                    };
                    let (d, core_body) =
                        self.with_hyp(ctx, x.clone(), (**dom).clone(), None, |me, inner| {
                            me.check_term(inner, &body, cod)
                        })?;
                    let v = Value::Lam(x, Box::new(core_body));
                    Ok((
                        Derivation::with(
                            RuleTag::ArrowI,
                            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                            vec![d],
                            vec![],
                        ),
                        v,
                    ))
                }
                other => Err(Self::fail(
                    ctx,
                    "λ_ _",
                    goal,
                    FailureReason::RuleMismatch(format!(
                        "a function cannot inhabit {other}"
                    )),
                )),
            },
            Ast::Ctor(c, payload) => match &goal_unfolded {
                Formula::VariantTy(cs) => match cs.get(c) {
                    Some(pay_ty) => {
                        let (d, pv) = self.check_value(ctx, payload, pay_ty)?;
                        let v = Value::Ctor(c.clone(), Box::new(pv));
                        Ok((
                            Derivation::with(
                                RuleTag::VariantI,
                                Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                                vec![d],
                                vec![],
                            ),
                            v,
                        ))
                    }
                    None => Err(Self::fail(
                        ctx,
                        &format!("{c}[…]"),
                        goal,
                        FailureReason::RuleMismatch(format!(
                            "constructor {c} is not part of the variant"
                        )),
                    )),
                },
                other => Err(Self::fail(
                    ctx,
                    &format!("{c}[…]"),
                    goal,
                    FailureReason::RuleMismatch(format!(
                        "a constructor cannot inhabit {other}"
                    )),
                )),
            },
            Ast::Record(fields) => match &goal_unfolded {
                Formula::RecordTy(tys) => {
                    let have: Vec<&Name> = fields.keys().collect();
                    let want: Vec<&Name> = tys.keys().collect();
                    if have != want {
                        return Err(Self::fail(
                            ctx,
                            "{…}",
                            goal,
                            FailureReason::RuleMismatch("record labels do not match".into()),
                        ));
                    }
                    let mut premises = Vec::new();
                    let mut vals = BTreeMap::new();
                    for (l, a) in fields {
                        let (d, v) = self.check_value(ctx, a, &tys[l])?;
                        premises.push(d);
                        vals.insert(l.clone(), v);
                    }
                    let v = Value::Record(vals);
                    Ok((
                        Derivation::with(
                            RuleTag::RecordI,
                            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                            premises,
                            vec![],
                        ),
                        v,
                    ))
                }
                other => Err(Self::fail(
                    ctx,
                    "{…}",
                    goal,
                    FailureReason::RuleMismatch(format!("a record cannot inhabit {other}")),
                )),
            },
            Ast::Core(Term::Val(v)) => {
                let as_ast = ast_of_value(v);
                self.check_value(ctx, &as_ast, goal)
            }
            other => Err(Self::fail(
                ctx,
                "_",
                goal,
                FailureReason::RuleMismatch(format!("{other:?} is not a value")),
            )),
        }
    }

    fn check_var(
        &self,
        ctx: &TypingContext,
        x: &Name,
        goal: &Formula,
    ) -> Result<(Derivation, Value), CheckFailure> {
        let Some(hyp) = ctx.lambda_hyp(x).cloned() else {
            return Err(Self::fail(
                ctx,
                x.as_str(),
                goal,
                FailureReason::RuleMismatch(format!("unbound variable {x}")),
            ));
        };
        let v = Value::Var(x.clone());
        if self.matches(&hyp, goal) {
            return Ok((
                Derivation::new(RuleTag::Ax, Judgement::value(ctx.clone(), v, goal.clone())),
                Value::Var(x.clone()),
            ));
        }
        // a hypothesis of type ⊥ proves anything by instantiation
        if self.matches(&hyp, &crate::types::sugar_bot()) {
            let ax = Derivation::new(
                RuleTag::Ax,
                Judgement::value(ctx.clone(), v.clone(), hyp.clone()),
            );
            let up = Derivation::with(
                RuleTag::Up,
                Judgement::term(ctx.clone(), Term::Val(v.clone()), hyp.clone()),
                vec![ax],
                vec![],
            );
            let inst = Derivation::with(
                RuleTag::ForallPredE,
                Judgement::term(ctx.clone(), Term::Val(v.clone()), goal.clone()),
                vec![up],
                vec![SideCondition::PredWitness(PredicateDef {
                    params: vec![],
                    body: goal.clone(),
                })],
            );
            let down = Derivation::with(
                RuleTag::Down,
                Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                vec![inst],
                vec![],
            );
            return Ok((down, v));
        }
        Err(Self::fail(
            ctx,
            x.as_str(),
            goal,
            FailureReason::RuleMismatch(format!("hypothesis {x} : {hyp} does not match")),
        ))
    }

    /// `⊩ v : t ∈ B` — directly when `t` is the subject, otherwise through
    /// the equational rewriting rules.
    fn check_member(
        &self,
        ctx: &TypingContext,
        ast: &Ast,
        t: &Term,
        b: &Formula,
        goal: &Formula,
    ) -> Result<(Derivation, Value), CheckFailure> {
        let (d_b, v) = self.check_value(ctx, ast, b)?;
        let v_term = Term::Val(v.clone());
        if alpha_eq_term(t, &v_term) {
            return Ok((
                Derivation::with(
                    RuleTag::MemberI,
                    Judgement::value(ctx.clone(), v.clone(), goal.clone()),
                    vec![d_b],
                    vec![],
                ),
                v,
            ));
        }
        // need t ≡ v
        let verdict = decide(&self.ectx(ctx), t, &v_term, Polarity::Equiv, &self.budget);
        if !verdict.is_proved() {
            return Err(Self::fail(
                ctx,
                &v_term.to_string(),
                goal,
                FailureReason::EquivalenceUnknown { lhs: t.clone(), rhs: v_term },
            ));
        }
        let ctx2 = ctx.extended(ContextEntry::EquivHyp(t.clone(), v_term.clone()));
        let (d_b2, _) = self.check_value(&ctx2, ast, b)?;
        let member = Derivation::with(
            RuleTag::MemberI,
            Judgement::value(ctx2.clone(), v.clone(), Formula::Member(Box::new(v_term.clone()), Box::new(b.clone()))),
            vec![d_b2],
            vec![],
        );
        let up = Derivation::with(
            RuleTag::Up,
            Judgement::term(
                ctx2.clone(),
                v_term.clone(),
                Formula::Member(Box::new(v_term.clone()), Box::new(b.clone())),
            ),
            vec![member],
            vec![],
        );
        let hole = fresh(&Name::new("h"));
        let pattern = Formula::Member(Box::new(Term::TermVar(hole.clone())), Box::new(b.clone()));
        let rewrite = Derivation::with(
            RuleTag::EquivTR,
            Judgement::term(ctx2.clone(), v_term.clone(), goal.clone()),
            vec![up],
            vec![SideCondition::FormulaPattern {
                pattern,
                var: hole,
                from: v_term.clone(),
                to: t.clone(),
            }],
        );
        let down = Derivation::with(
            RuleTag::Down,
            Judgement::value(ctx2, v.clone(), goal.clone()),
            vec![rewrite],
            vec![],
        );
        let discharge = Derivation::with(
            RuleTag::EquivDischarge,
            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
            vec![down],
            vec![SideCondition::Equivalence {
                lhs: t.clone(),
                rhs: v_term,
                polarity: Polarity::Equiv,
                verdict,
            }],
        );
        Ok((discharge, v))
    }

    fn check_restricted_value(
        &self,
        ctx: &TypingContext,
        ast: &Ast,
        b: &Formula,
        t: &Term,
        u: &Term,
        goal: &Formula,
    ) -> Result<(Derivation, Value), CheckFailure> {
        let verdict = decide(&self.ectx(ctx), t, u, Polarity::Equiv, &self.budget);
        match verdict {
            Verdict::Proved { .. } => {}
            Verdict::Unknown => {
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::EquivalenceUnknown { lhs: t.clone(), rhs: u.clone() },
                ))
            }
            Verdict::Refuted { .. } => {
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::RuleMismatch(format!("the equation {t} ≡ {u} is refuted")),
                ))
            }
        }
        let ctx2 = ctx.extended(ContextEntry::EquivHyp(t.clone(), u.clone()));
        let (d, v) = self.check_value(&ctx2, ast, b)?;
        let v_term = Term::Val(v.clone());
        let up = Derivation::with(
            RuleTag::Up,
            Judgement::term(ctx2.clone(), v_term.clone(), b.clone()),
            vec![d],
            vec![],
        );
        let restrict = Derivation::with(
            RuleTag::RestrictI,
            Judgement::term(ctx2.clone(), v_term.clone(), goal.clone()),
            vec![up],
            vec![],
        );
        let down = Derivation::with(
            RuleTag::Down,
            Judgement::value(ctx2, v.clone(), goal.clone()),
            vec![restrict],
            vec![],
        );
        let discharge = Derivation::with(
            RuleTag::EquivDischarge,
            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
            vec![down],
            vec![SideCondition::Equivalence {
                lhs: t.clone(),
                rhs: u.clone(),
                polarity: Polarity::Equiv,
                verdict,
            }],
        );
        Ok((discharge, v))
    }

    /// `⊩ v : ⊤` through `∃_I` with a synthesized witness predicate.
    fn check_value_top(
        &self,
        ctx: &TypingContext,
        ast: &Ast,
        goal: &Formula,
    ) -> Result<(Derivation, Value), CheckFailure> {
        let (syn_d, syn_ty, v) = self.synthesize_value(ctx, ast)?;
        let up = Derivation::with(
            RuleTag::Up,
            Judgement::term(ctx.clone(), Term::Val(v.clone()), syn_ty.clone()),
            vec![syn_d],
            vec![],
        );
        let inst = Derivation::with(
            RuleTag::ExistsPredI,
            Judgement::term(ctx.clone(), Term::Val(v.clone()), goal.clone()),
            vec![up],
            vec![SideCondition::PredWitness(PredicateDef { params: vec![], body: syn_ty })],
        );
        let down = Derivation::with(
            RuleTag::Down,
            Judgement::value(ctx.clone(), v.clone(), goal.clone()),
            vec![inst],
            vec![],
        );
        Ok((down, v))
    }

    /// Structural type synthesis for values: variables from hypotheses,
    /// records and constructors from their components.
    fn synthesize_value(
        &self,
        ctx: &TypingContext,
        ast: &Ast,
    ) -> Result<(Derivation, Formula, Value), CheckFailure> {
        match ast {
            Ast::Var(x) => match ctx.lambda_hyp(x) {
                Some(a) => {
                    let v = Value::Var(x.clone());
                    Ok((
                        Derivation::new(
                            RuleTag::Ax,
                            Judgement::value(ctx.clone(), v.clone(), a.clone()),
                        ),
                        a.clone(),
                        v,
                    ))
                }
                None => Err(CheckFailure::new(
                    format!("{ctx} ⊩ {x} : ?"),
                    FailureReason::RuleMismatch(format!("unbound variable {x}")),
                )),
            },
            Ast::Record(fields) => {
                let mut premises = Vec::new();
                let mut tys = BTreeMap::new();
                let mut vals = BTreeMap::new();
                for (l, a) in fields {
                    let (d, ty, v) = self.synthesize_value(ctx, a)?;
                    premises.push(d);
                    tys.insert(l.clone(), ty);
                    vals.insert(l.clone(), v);
                }
                let v = Value::Record(vals);
                let ty = Formula::RecordTy(tys);
                Ok((
                    Derivation::with(
                        RuleTag::RecordI,
                        Judgement::value(ctx.clone(), v.clone(), ty.clone()),
                        premises,
                        vec![],
                    ),
                    ty,
                    v,
                ))
            }
            Ast::Ctor(c, payload) => {
                let (d, pay_ty, pv) = self.synthesize_value(ctx, payload)?;
                let v = Value::Ctor(c.clone(), Box::new(pv));
                let mut cs = BTreeMap::new();
                cs.insert(c.clone(), pay_ty);
                let ty = Formula::VariantTy(cs);
                Ok((
                    Derivation::with(
                        RuleTag::VariantI,
                        Judgement::value(ctx.clone(), v.clone(), ty.clone()),
                        vec![d],
                        vec![],
                    ),
                    ty,
                    v,
                ))
            }
            Ast::Core(Term::Val(v)) => self.synthesize_value(ctx, &ast_of_value(v)),
            other => Err(CheckFailure::new(
                "⊩ _ : ?".to_string(),
                FailureReason::AnnotationNeeded(format!(
                    "cannot synthesize a type for {other:?}"
                )),
            )),
        }
    }

    // ------------------------------------------------------------------
    // ✂.

    fn check_scissors(&self, ctx: &TypingContext, goal: &Formula) -> Checked {
        let e = self.ectx(ctx);
        let contradictory = context_contradictory(&e, &self.budget);
        if contradictory.is_proved() {
            let bot = crate::types::sugar_bot();
            let scissors = Derivation::with(
                RuleTag::Scissors,
                Judgement::value(ctx.clone(), Value::Scissors, bot.clone()),
                vec![],
                vec![SideCondition::ContextContradictory { verdict: contradictory }],
            );
            let term = Term::Val(Value::Scissors);
            let up = Derivation::with(
                RuleTag::Up,
                Judgement::term(ctx.clone(), term.clone(), bot.clone()),
                vec![scissors],
                vec![],
            );
            if self.matches(goal, &bot) {
                return Ok((up, term));
            }
            let inst = Derivation::with(
                RuleTag::ForallPredE,
                Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                vec![up],
                vec![SideCondition::PredWitness(PredicateDef {
                    params: vec![],
                    body: goal.clone(),
                })],
            );
            return Ok((inst, term));
        }
        // otherwise the goal must be an equation provable from the context
        let unfolded = self.table.head_unfold(goal);
        if let Formula::Restrict(b, t, u) = &unfolded {
            if b.is_top() {
                let verdict = decide(&e, t, u, Polarity::Equiv, &self.budget);
                if !verdict.is_proved() {
                    return Err(Self::fail(
                        ctx,
                        "✂",
                        goal,
                        FailureReason::EquivalenceUnknown { lhs: (**t).clone(), rhs: (**u).clone() },
                    ));
                }
                let ctx2 =
                    ctx.extended(ContextEntry::EquivHyp((**t).clone(), (**u).clone()));
                let unit_ast = Ast::Record(BTreeMap::new());
                let (d_top, unit_core) = {
                    let (d, v) = self.check_value_top(&ctx2, &unit_ast, b)?;
                    let t = Term::Val(v);
                    let up = Derivation::with(
                        RuleTag::Up,
                        Judgement::term(ctx2.clone(), t.clone(), (**b).clone()),
                        vec![d],
                        vec![],
                    );
                    (up, t)
                };
                let restrict = Derivation::with(
                    RuleTag::RestrictI,
                    Judgement::term(ctx2.clone(), unit_core.clone(), goal.clone()),
                    vec![d_top],
                    vec![],
                );
                let discharge = Derivation::with(
                    RuleTag::EquivDischarge,
                    Judgement::term(ctx.clone(), unit_core.clone(), goal.clone()),
                    vec![restrict],
                    vec![SideCondition::Equivalence {
                        lhs: (**t).clone(),
                        rhs: (**u).clone(),
                        polarity: Polarity::Equiv,
                        verdict,
                    }],
                );
                return Ok((discharge, unit_core));
            }
        }
        Err(Self::fail(
            ctx,
            "✂",
            goal,
            FailureReason::RuleMismatch(
                "✂ needs a contradictory context or an equation goal provable from it".into(),
            ),
        ))
    }

    // ------------------------------------------------------------------
    // Hypothesis introduction with left-rule saturation.

    /// Push the hypothesis `x : a` (and optionally one trailing entry,
    /// the case-branch equation), saturating the hypothesis with the left
    /// rules: memberships release their equation, restrictions theirs,
    /// existentials open their witness. Each expansion replaces one
    /// context entry by a short run of entries; the wrapping derivation
    /// nodes collapse them back, innermost first.
    fn with_hyp<F>(
        &self,
        ctx: &TypingContext,
        x: Name,
        a: Formula,
        extra: Option<ContextEntry>,
        k: F,
    ) -> Checked
    where
        F: FnOnce(&Checker, &TypingContext) -> Checked,
    {
        let mut entries = ctx.entries.clone();
        let mut hyp_pos = entries.len();
        entries.push(ContextEntry::LambdaHyp(x, a));
        // (rule, replaced position, original entry, expansion width, side)
        let mut expansions: Vec<(RuleTag, usize, ContextEntry, usize, Vec<SideCondition>)> =
            Vec::new();
        while let ContextEntry::LambdaHyp(y, hyp) = entries[hyp_pos].clone() {
            match self.table.head_unfold(&hyp) {
                Formula::Member(u, b) => {
                    let original = entries[hyp_pos].clone();
                    entries[hyp_pos] = ContextEntry::LambdaHyp(y.clone(), (*b).clone());
                    entries.insert(
                        hyp_pos + 1,
                        ContextEntry::EquivHyp(Term::Val(Value::Var(y)), (*u).clone()),
                    );
                    expansions.push((RuleTag::MemberE, hyp_pos, original, 2, vec![]));
                }
                Formula::Restrict(b, t, u) => {
                    let original = entries[hyp_pos].clone();
                    entries[hyp_pos] = ContextEntry::LambdaHyp(y, (*b).clone());
                    entries.insert(
                        hyp_pos + 1,
                        ContextEntry::EquivHyp((*t).clone(), (*u).clone()),
                    );
                    expansions.push((RuleTag::RestrictE, hyp_pos, original, 2, vec![]));
                }
                Formula::ExistsTerm(a2, b) => {
                    let original = entries[hyp_pos].clone();
                    let scope = TypingContext { entries: entries.clone() };
                    let a3 = self.fresh_term_decl(&scope, &a2);
                    let inst = formula_subst(
                        &b,
                        &FormulaBinding::Term(a2, Term::TermVar(a3.clone())),
                    )
                    .map_err(|e| {
                        CheckFailure::new(
                            format!("{scope} ⊢ _"),
                            FailureReason::RuleMismatch(e.to_string()),
                        )
                    })?;
                    entries[hyp_pos] = ContextEntry::TermDecl(a3.clone());
                    entries.insert(hyp_pos + 1, ContextEntry::LambdaHyp(y, inst));
                    expansions.push((
                        RuleTag::ExistsTermE,
                        hyp_pos,
                        original,
                        2,
                        vec![SideCondition::Freshness(a3)],
                    ));
                    hyp_pos += 1;
                }
                Formula::ExistsPred(x2, n, b) => {
                    let original = entries[hyp_pos].clone();
                    let scope = TypingContext { entries: entries.clone() };
                    let x3 = self.fresh_pred_decl(&scope, &x2);
                    let inst = rename_pred_in(&b, &x2, &x3);
                    entries[hyp_pos] = ContextEntry::PredDecl(x3.clone(), n);
                    entries.insert(hyp_pos + 1, ContextEntry::LambdaHyp(y, inst));
                    expansions.push((
                        RuleTag::ExistsPredE,
                        hyp_pos,
                        original,
                        2,
                        vec![SideCondition::Freshness(x3)],
                    ));
                    hyp_pos += 1;
                }
                _ => break,
            }
        }
        if let Some(e) = extra {
            entries.push(e);
        }
        let ctx_inner = TypingContext { entries };
        let (mut d, core) = k(self, &ctx_inner)?;
        for (rule, pos, original, width, side) in expansions.into_iter().rev() {
            let mut es = d.conclusion.context.entries.clone();
            es.splice(pos..pos + width, [original]);
            let conclusion = Judgement {
                kind: d.conclusion.kind,
                context: TypingContext { entries: es },
                subject: d.conclusion.subject.clone(),
                formula: d.conclusion.formula.clone(),
            };
            d = Derivation::with(rule, conclusion, vec![d], side);
        }
        Ok((d, core))
    }

    fn fresh_term_decl(&self, ctx: &TypingContext, base: &Name) -> Name {
        let fv = ctx.free_vars();
        if ctx.declares_term_var(base) || fv.term.contains(base) {
            fresh(base)
        } else {
            base.clone()
        }
    }

    fn fresh_pred_decl(&self, ctx: &TypingContext, base: &Name) -> Name {
        let fv = ctx.free_vars();
        let declared = ctx
            .entries
            .iter()
            .any(|e| matches!(e, ContextEntry::PredDecl(x, _) if x == base));
        if declared || fv.pred.contains(base) {
            fresh(base)
        } else {
            base.clone()
        }
    }

    // ------------------------------------------------------------------
    // case and projection.

    fn resolve_variant(
        &self,
        ctx: &TypingContext,
        scrut: &Ast,
        branches: &BTreeMap<Name, (Name, Ast)>,
    ) -> Result<Formula, CheckFailure> {
        if let Ast::Var(x) = scrut {
            if let Some(hyp) = ctx.lambda_hyp(x) {
                let unfolded = self.table.head_unfold(hyp);
                if matches!(unfolded, Formula::VariantTy(_)) {
                    return Ok(hyp.clone());
                }
            }
        }
        // a unique declared variant with exactly the branch constructors
        let keys: Vec<&Name> = branches.keys().collect();
        let mut candidates = Vec::new();
        for (name, def) in &self.table.defs {
            if let Formula::VariantTy(cs) = def {
                if cs.keys().collect::<Vec<_>>() == keys {
                    candidates.push(name.clone());
                }
            }
        }
        match candidates.as_slice() {
            [one] => Ok(Formula::Named(one.clone())),
            [] => Err(CheckFailure::new(
                format!("{ctx} ⊢ case _"),
                FailureReason::AnnotationNeeded(
                    "cannot determine the variant type of the scrutinee".into(),
                ),
            )),
            _ => Err(CheckFailure::new(
                format!("{ctx} ⊢ case _"),
                FailureReason::AnnotationNeeded(format!(
                    "several variant types match the branches: {candidates:?}"
                )),
            )),
        }
    }

    fn check_case(
        &self,
        ctx: &TypingContext,
        scrut: &Ast,
        branches: &BTreeMap<Name, (Name, Ast)>,
        goal: &Formula,
    ) -> Checked {
        if !scrut.is_value_form() {
            // wrap per the surface sugar: case t {…} = (λx case x {…}) t
            let x = fresh(&Name::new("x"));
            let wrapped = Ast::app(
                Ast::Lam(x.clone(), Box::new(Ast::Case(Box::new(Ast::Var(x)), branches.clone()))),
                scrut.clone(),
            );
            return self.check_term(ctx, &wrapped, goal);
        }
        let variant_ty = self.resolve_variant(ctx, scrut, branches)?;
        let Formula::VariantTy(ctor_tys) = self.table.head_unfold(&variant_ty) else {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ case _ : {goal}"),
                FailureReason::RuleMismatch("scrutinee type is not a variant".into()),
            ));
        };
        let (d_scrut, scrut_val) = self.check_value(ctx, scrut, &variant_ty)?;
        let scrut_term = Term::Val(scrut_val.clone());
        if ctor_tys.keys().collect::<Vec<_>>() != branches.keys().collect::<Vec<_>>() {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ case {scrut_term} : {goal}"),
                FailureReason::RuleMismatch(
                    "branches do not cover the variant constructors exactly".into(),
                ),
            ));
        }
        let mut premises = vec![d_scrut];
        let mut core_branches = BTreeMap::new();
        for (c, (x, body)) in branches {
            let (x, body) = if ctx.lambda_hyp(x).is_some() {
                let x2 = fresh(x);
                (x2.clone(), rename_lambda(body, x, &x2))
            } else {
                (x.clone(), body.clone())
            };
            let pay_ty = ctor_tys[c].clone();
            let eq_lhs = Term::Val(Value::Ctor(c.clone(), Box::new(Value::Var(x.clone()))));
            let eq = ContextEntry::EquivHyp(eq_lhs, scrut_term.clone());
            let (d_branch, core_body) =
                self.with_hyp(ctx, x.clone(), pay_ty, Some(eq), |me, inner| {
                    me.check_term(inner, &body, goal)
                })?;
            premises.push(d_branch);
            core_branches.insert(c.clone(), (x, core_body));
        }
        let term = Term::Case(Box::new(scrut_val), core_branches);
        Ok((
            Derivation::with(
                RuleTag::VariantE,
                Judgement::term(ctx.clone(), term.clone(), goal.clone()),
                premises,
                vec![],
            ),
            term,
        ))
    }

    fn infer_proj(&self, ctx: &TypingContext, scrut: &Ast, label: &Name) -> Inferred {
        if !scrut.is_value_form() {
            let x = fresh(&Name::new("x"));
            let wrapped = Ast::app(
                Ast::Lam(x.clone(), Box::new(Ast::Proj(Box::new(Ast::Var(x)), label.clone()))),
                scrut.clone(),
            );
            return self.infer(ctx, &wrapped);
        }
        // record type from the hypothesis or synthesized structurally
        let rec_ty = if let Ast::Var(x) = scrut {
            ctx.lambda_hyp(x).cloned().ok_or_else(|| {
                CheckFailure::new(
                    format!("{ctx} ⊢ {x}.{label} : ?"),
                    FailureReason::RuleMismatch(format!("unbound variable {x}")),
                )
            })?
        } else {
            let (_, ty, _) = self.synthesize_value(ctx, scrut)?;
            ty
        };
        let Formula::RecordTy(fields) = self.table.head_unfold(&rec_ty) else {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ _.{label} : ?"),
                FailureReason::RuleMismatch(format!("scrutinee has non-record type {rec_ty}")),
            ));
        };
        let Some(field_ty) = fields.get(label) else {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ _.{label} : ?"),
                FailureReason::RuleMismatch(format!("no field {label} in {rec_ty}")),
            ));
        };
        let (d_scrut, v) = self.check_value(ctx, scrut, &rec_ty)?;
        let term = Term::Proj(Box::new(v), label.clone());
        let d = Derivation::with(
            RuleTag::RecordE,
            Judgement::term(ctx.clone(), term.clone(), field_ty.clone()),
            vec![d_scrut],
            vec![],
        );
        Ok((d, field_ty.clone(), term))
    }

    // ------------------------------------------------------------------
    // Synthesis.

    pub fn infer(&self, ctx: &TypingContext, ast: &Ast) -> Inferred {
        match ast {
            Ast::Var(x) => match ctx.lambda_hyp(x) {
                Some(a) => {
                    let v = Value::Var(x.clone());
                    let ax = Derivation::new(
                        RuleTag::Ax,
                        Judgement::value(ctx.clone(), v.clone(), a.clone()),
                    );
                    let up = Derivation::with(
                        RuleTag::Up,
                        Judgement::term(ctx.clone(), Term::Val(v.clone()), a.clone()),
                        vec![ax],
                        vec![],
                    );
                    Ok((up, a.clone(), Term::Val(v)))
                }
                None => Err(CheckFailure::new(
                    format!("{ctx} ⊢ {x} : ?"),
                    FailureReason::RuleMismatch(format!("unbound variable {x}")),
                )),
            },
            Ast::App(f, a) => {
                let (d_f, f_ty, _) = self.infer(ctx, f)?;
                let f_ty = self.table.head_unfold(&f_ty);
                if let Formula::Arrow(dom, cod) = &f_ty {
                    let (d_a, a_core) = self.check_term(ctx, a, dom)?;
                    let term = Term::app(d_a_core(&d_f), a_core);
                    let d = Derivation::with(
                        RuleTag::ArrowE,
                        Judgement::term(ctx.clone(), term.clone(), (**cod).clone()),
                        vec![d_f, d_a],
                        vec![],
                    );
                    return Ok((d, (**cod).clone(), term));
                }
                if f_ty.as_pi().is_some() {
                    return self.pi_apply(ctx, f, d_f, &f_ty, a);
                }
                Err(CheckFailure::new(
                    format!("{ctx} ⊢ _ _ : ?"),
                    FailureReason::AnnotationNeeded(format!(
                        "cannot apply a term of type {f_ty}"
                    )),
                ))
            }
            Ast::WitnessTerm(e, u) => {
                let (d_e, e_ty, core) = self.infer(ctx, e)?;
                match self.table.head_unfold(&e_ty) {
                    Formula::ForallTerm(a, body) => {
                        let inst = formula_subst(&body, &FormulaBinding::Term(a, u.clone()))
                            .map_err(|er| {
                                CheckFailure::new(
                                    format!("{ctx} ⊢ _ : ?"),
                                    FailureReason::RuleMismatch(er.to_string()),
                                )
                            })?;
                        let d = Derivation::with(
                            RuleTag::ForallTermE,
                            Judgement::term(ctx.clone(), core.clone(), inst.clone()),
                            vec![d_e],
                            vec![SideCondition::TermWitness(u.clone())],
                        );
                        Ok((d, inst, core))
                    }
                    other => Err(CheckFailure::new(
                        format!("{ctx} ⊢ _ : ?"),
                        FailureReason::RuleMismatch(format!(
                            "term witness on a non-universal type {other}"
                        )),
                    )),
                }
            }
            Ast::WitnessPred(e, p) => {
                let (d_e, e_ty, core) = self.infer(ctx, e)?;
                match self.table.head_unfold(&e_ty) {
                    Formula::ForallPred(x, n, body) => {
                        if p.arity() != n {
                            return Err(CheckFailure::new(
                                format!("{ctx} ⊢ _ : ?"),
                                FailureReason::RuleMismatch(format!(
                                    "predicate witness arity {} ≠ {n}",
                                    p.arity()
                                )),
                            ));
                        }
                        let inst = formula_subst(&body, &FormulaBinding::Pred(x, p.clone()))
                            .map_err(|er| {
                                CheckFailure::new(
                                    format!("{ctx} ⊢ _ : ?"),
                                    FailureReason::RuleMismatch(er.to_string()),
                                )
                            })?;
                        let d = Derivation::with(
                            RuleTag::ForallPredE,
                            Judgement::term(ctx.clone(), core.clone(), inst.clone()),
                            vec![d_e],
                            vec![SideCondition::PredWitness(p.clone())],
                        );
                        Ok((d, inst, core))
                    }
                    other => Err(CheckFailure::new(
                        format!("{ctx} ⊢ _ : ?"),
                        FailureReason::RuleMismatch(format!(
                            "predicate witness on a non-universal type {other}"
                        )),
                    )),
                }
            }
            Ast::Proj(scrut, label) => self.infer_proj(ctx, scrut, label),
            _ if ast.is_value_form() => {
                let (d, ty, v) = self.synthesize_value(ctx, ast)?;
                let up = Derivation::with(
                    RuleTag::Up,
                    Judgement::term(ctx.clone(), Term::Val(v.clone()), ty.clone()),
                    vec![d],
                    vec![],
                );
                Ok((up, ty, Term::Val(v)))
            }
            other => Err(CheckFailure::new(
                "⊢ _ : ?".to_string(),
                FailureReason::AnnotationNeeded(format!(
                    "cannot infer a type for {other:?}"
                )),
            )),
        }
    }

    // ------------------------------------------------------------------
    // Dependent application.

    /// Apply `f : ∀a (a ∈ A ⇒ B)` to `arg`. A syntactic-value argument
    /// uses the membership introduction directly; any other argument must
    /// be provably equivalent to a value, going through the derived rule.
    fn pi_apply(
        &self,
        ctx: &TypingContext,
        f_ast: &Ast,
        d_f: Derivation,
        f_ty: &Formula,
        arg: &Ast,
    ) -> Inferred {
        let (a_var, dom, cod) = match f_ty.as_pi() {
            Some((a, d, c)) => (a.clone(), d.clone(), c.clone()),
            None => unreachable!("pi_apply on a non-pi type"),
        };
        if formula_free_vars(&dom).term.contains(&a_var) {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ _ _ : ?"),
                FailureReason::AnnotationNeeded(
                    "dependent domain mentions its own quantifier".into(),
                ),
            ));
        }
        let (d_arg, u_core) = self.check_term(ctx, arg, &dom)?;
        let result = formula_subst(&cod, &FormulaBinding::Term(a_var.clone(), u_core.clone()))
            .map_err(|e| {
                CheckFailure::new(
                    format!("{ctx} ⊢ _ _ : ?"),
                    FailureReason::RuleMismatch(e.to_string()),
                )
            })?;
        let inst_arrow = Formula::Arrow(
            Box::new(Formula::Member(Box::new(u_core.clone()), Box::new(dom.clone()))),
            Box::new(result.clone()),
        );

        if let Term::Val(u_val) = &u_core {
            // plain route: the argument is already a value
            let f_inst = Derivation::with(
                RuleTag::ForallTermE,
                Judgement::term(ctx.clone(), d_a_core(&d_f), inst_arrow.clone()),
                vec![d_f],
                vec![SideCondition::TermWitness(u_core.clone())],
            );
            let down = Derivation::with(
                RuleTag::Down,
                Judgement::value(ctx.clone(), u_val.clone(), dom.clone()),
                vec![d_arg],
                vec![],
            );
            let member = Derivation::with(
                RuleTag::MemberI,
                Judgement::value(
                    ctx.clone(),
                    u_val.clone(),
                    Formula::Member(Box::new(u_core.clone()), Box::new(dom.clone())),
                ),
                vec![down],
                vec![],
            );
            let up = Derivation::with(
                RuleTag::Up,
                Judgement::term(
                    ctx.clone(),
                    u_core.clone(),
                    Formula::Member(Box::new(u_core.clone()), Box::new(dom.clone())),
                ),
                vec![member],
                vec![],
            );
            let term = Term::app(d_a_core(&f_inst), u_core.clone());
            let app = Derivation::with(
                RuleTag::ArrowE,
                Judgement::term(ctx.clone(), term.clone(), result.clone()),
                vec![f_inst, up],
                vec![],
            );
            return Ok((app, result, term));
        }

        // semantical value restriction: find a value equivalent to the
        // argument and expand the derived rule
        let Some((v, verdict)) = self.semantical_restriction(ctx, &u_core) else {
            return Err(CheckFailure::new(
                format!("{ctx} ⊢ _ {u_core} : ?"),
                FailureReason::RuleMismatch(format!(
                    "argument {u_core} is not a value and is not provably equivalent to one"
                )),
            ));
        };
        let v_term = Term::Val(v.clone());
        let ctx2 = ctx.extended(ContextEntry::EquivHyp(u_core.clone(), v_term.clone()));

        // the first-pass premises are superseded by re-runs under the
        // extended context
        drop((d_arg, d_f));
        let (d_f2, _, _) = self.infer(&ctx2, f_ast)?;
        let (d_arg2, _) = self.check_term(&ctx2, arg, &dom)?;

        let f_inst = Derivation::with(
            RuleTag::ForallTermE,
            Judgement::term(ctx2.clone(), d_a_core(&d_f2), inst_arrow),
            vec![d_f2],
            vec![SideCondition::TermWitness(u_core.clone())],
        );
        let hole = fresh(&Name::new("h"));
        // ⊢ u : A  →  ⊢ v : A
        let subj_to_v = Derivation::with(
            RuleTag::EquivTL,
            Judgement::term(ctx2.clone(), v_term.clone(), dom.clone()),
            vec![d_arg2],
            vec![SideCondition::SubjectPattern {
                pattern: Term::TermVar(hole.clone()),
                var: hole.clone(),
                from: u_core.clone(),
                to: v_term.clone(),
            }],
        );
        let down = Derivation::with(
            RuleTag::Down,
            Judgement::value(ctx2.clone(), v.clone(), dom.clone()),
            vec![subj_to_v],
            vec![],
        );
        let member = Derivation::with(
            RuleTag::MemberI,
            Judgement::value(
                ctx2.clone(),
                v.clone(),
                Formula::Member(Box::new(v_term.clone()), Box::new(dom.clone())),
            ),
            vec![down],
            vec![],
        );
        let up = Derivation::with(
            RuleTag::Up,
            Judgement::term(
                ctx2.clone(),
                v_term.clone(),
                Formula::Member(Box::new(v_term.clone()), Box::new(dom.clone())),
            ),
            vec![member],
            vec![],
        );
        // ⊢ v : v ∈ A  →  ⊢ u : v ∈ A
        let back_to_u = Derivation::with(
            RuleTag::EquivTL,
            Judgement::term(
                ctx2.clone(),
                u_core.clone(),
                Formula::Member(Box::new(v_term.clone()), Box::new(dom.clone())),
            ),
            vec![up],
            vec![SideCondition::SubjectPattern {
                pattern: Term::TermVar(hole.clone()),
                var: hole.clone(),
                from: v_term.clone(),
                to: u_core.clone(),
            }],
        );
        // …  →  ⊢ u : u ∈ A
        let member_u = Derivation::with(
            RuleTag::EquivTR,
            Judgement::term(
                ctx2.clone(),
                u_core.clone(),
                Formula::Member(Box::new(u_core.clone()), Box::new(dom.clone())),
            ),
            vec![back_to_u],
            vec![SideCondition::FormulaPattern {
                pattern: Formula::Member(
                    Box::new(Term::TermVar(hole.clone())),
                    Box::new(dom.clone()),
                ),
                var: hole,
                from: v_term.clone(),
                to: u_core.clone(),
            }],
        );
        let term = Term::app(d_a_core(&f_inst), u_core.clone());
        let app = Derivation::with(
            RuleTag::ArrowE,
            Judgement::term(ctx2.clone(), term.clone(), result.clone()),
            vec![f_inst, member_u],
            vec![],
        );
        let discharge = Derivation::with(
            RuleTag::EquivDischarge,
            Judgement::term(ctx.clone(), term.clone(), result.clone()),
            vec![app],
            vec![SideCondition::Equivalence {
                lhs: u_core.clone(),
                rhs: v_term,
                polarity: Polarity::Equiv,
                verdict,
            }],
        );
        let macro_node = Derivation::with(
            RuleTag::MacroPiEEq,
            Judgement::term(ctx.clone(), term.clone(), result.clone()),
            vec![discharge],
            vec![],
        );
        Ok((macro_node, result, term))
    }

    /// Find a value the term is provably equivalent to: the term itself,
    /// its normal form, or a value from the saturated equational graph.
    pub fn semantical_restriction(
        &self,
        ctx: &TypingContext,
        u: &Term,
    ) -> Option<(Value, Verdict)> {
        apply_semantical_restriction(self.table, &self.budget, ctx, u)
    }

    // ------------------------------------------------------------------
    // Hints.

    fn check_with_term_witness(
        &self,
        ctx: &TypingContext,
        e: &Ast,
        u: &Term,
        goal: &Formula,
    ) -> Checked {
        let unfolded = self.table.head_unfold(goal);
        if let Formula::ExistsTerm(a, body) = &unfolded {
            let inst = formula_subst(body, &FormulaBinding::Term(a.clone(), u.clone()))
                .map_err(|er| {
                    Self::fail(ctx, "_", goal, FailureReason::RuleMismatch(er.to_string()))
                })?;
            let (d, core) = self.check_term(ctx, e, &inst)?;
            return Ok((
                Derivation::with(
                    RuleTag::ExistsTermI,
                    Judgement::term(ctx.clone(), core.clone(), goal.clone()),
                    vec![d],
                    vec![SideCondition::TermWitness(u.clone())],
                ),
                core,
            ));
        }
        // otherwise instantiate the inferred universal type
        let (d, ty, core) = self.infer(ctx, &Ast::WitnessTerm(Box::new(e.clone()), u.clone()))?;
        if self.matches(&ty, goal) {
            Ok((d, core))
        } else {
            Err(Self::fail(
                ctx,
                &core.to_string(),
                goal,
                FailureReason::RuleMismatch(format!("witness instantiation produces {ty}")),
            ))
        }
    }

    fn check_with_pred_witness(
        &self,
        ctx: &TypingContext,
        e: &Ast,
        p: &PredicateDef,
        goal: &Formula,
    ) -> Checked {
        let unfolded = self.table.head_unfold(goal);
        if let Formula::ExistsPred(x, n, body) = &unfolded {
            if p.arity() != *n {
                return Err(Self::fail(
                    ctx,
                    "_",
                    goal,
                    FailureReason::RuleMismatch(format!(
                        "predicate witness arity {} ≠ {n}",
                        p.arity()
                    )),
                ));
            }
            let inst = formula_subst(body, &FormulaBinding::Pred(x.clone(), p.clone()))
                .map_err(|er| {
                    Self::fail(ctx, "_", goal, FailureReason::RuleMismatch(er.to_string()))
                })?;
            let (d, core) = self.check_term(ctx, e, &inst)?;
            return Ok((
                Derivation::with(
                    RuleTag::ExistsPredI,
                    Judgement::term(ctx.clone(), core.clone(), goal.clone()),
                    vec![d],
                    vec![SideCondition::PredWitness(p.clone())],
                ),
                core,
            ));
        }
        let (d, ty, core) = self.infer(ctx, &Ast::WitnessPred(Box::new(e.clone()), p.clone()))?;
        if self.matches(&ty, goal) {
            Ok((d, core))
        } else {
            Err(Self::fail(
                ctx,
                &core.to_string(),
                goal,
                FailureReason::RuleMismatch(format!("witness instantiation produces {ty}")),
            ))
        }
    }

    fn check_with_rewrite(
        &self,
        ctx: &TypingContext,
        e: &Ast,
        t: &Term,
        u: &Term,
        goal: &Formula,
    ) -> Checked {
        let verdict = decide(&self.ectx(ctx), t, u, Polarity::Equiv, &self.budget);
        if !verdict.is_proved() {
            return Err(Self::fail(
                ctx,
                "rewrite _",
                goal,
                FailureReason::EquivalenceUnknown { lhs: t.clone(), rhs: u.clone() },
            ));
        }
        let hole = fresh(&Name::new("h"));
        let pattern = abstract_term_in_formula(goal, t, &hole);
        let rewritten = formula_subst(&pattern, &FormulaBinding::Term(hole.clone(), u.clone()))
            .map_err(|er| {
                Self::fail(ctx, "rewrite _", goal, FailureReason::RuleMismatch(er.to_string()))
            })?;
        let ctx2 = ctx.extended(ContextEntry::EquivHyp(t.clone(), u.clone()));
        let (d, core) = self.check_term(&ctx2, e, &rewritten)?;
        let rewrite_node = Derivation::with(
            RuleTag::EquivTR,
            Judgement::term(ctx2, core.clone(), goal.clone()),
            vec![d],
            vec![SideCondition::FormulaPattern {
                pattern,
                var: hole,
                from: u.clone(),
                to: t.clone(),
            }],
        );
        let discharge = Derivation::with(
            RuleTag::EquivDischarge,
            Judgement::term(ctx.clone(), core.clone(), goal.clone()),
            vec![rewrite_node],
            vec![SideCondition::Equivalence {
                lhs: t.clone(),
                rhs: u.clone(),
                polarity: Polarity::Equiv,
                verdict,
            }],
        );
        Ok((discharge, core))
    }
}

/// Find a value the term is provably equivalent to. The term itself if it
/// is a value (reflexivity); otherwise its normal form when that is a
/// value; otherwise a value merged with it in the saturated graph of the
/// context's equations (which subsumes scanning the context).
pub fn apply_semantical_restriction(
    _table: &TypeTable,
    budget: &Budget,
    ctx: &TypingContext,
    u: &Term,
) -> Option<(Value, Verdict)> {
    let e = restrict_to_equational(ctx);
    if let Term::Val(v) = u {
        let verdict = decide(&e, u, u, Polarity::Equiv, budget);
        return verdict.is_proved().then_some((v.clone(), verdict));
    }
    let normal = normalize(u, budget.machine_fuel);
    if let Term::Val(v) = &normal {
        let verdict = decide(&e, u, &normal, Polarity::Equiv, budget);
        if verdict.is_proved() {
            return Some((v.clone(), verdict));
        }
    }
    find_equivalent_value(&e, u, budget)
}

// ---------------------------------------------------------------------------
// Small structural helpers.

/// The elaborated core subject recorded in a derivation's conclusion.
fn d_a_core(d: &Derivation) -> Term {
    d.conclusion.subject.clone()
}

fn term_value(t: &Term) -> Value {
    match t {
        Term::Val(v) => v.clone(),
        _ => Value::Scissors,
    }
}

fn term_value_owned(t: Term) -> Value {
    match t {
        Term::Val(v) => v,
        _ => Value::Scissors,
    }
}

/// Convert a core term back into checker input (used by internal drivers
/// and by payload recursion).
pub(crate) fn ast_of_term(t: &Term) -> Option<Ast> {
    Some(match t {
        Term::Val(v) => return Some(ast_of_value_ast(v)),
        Term::App(f, a) => Ast::app(ast_of_term(f)?, ast_of_term(a)?),
        Term::Mu(a, body) => Ast::Mu(a.clone(), Box::new(ast_of_term(body)?)),
        Term::Proc(p) => match &p.stack {
            crate::syntax::Stack::Var(a) => {
                Ast::Restart(Box::new(ast_of_term(&p.term)?), a.clone())
            }
            _ => return None,
        },
        Term::Proj(v, l) => Ast::Proj(Box::new(ast_of_value_ast(v)), l.clone()),
        Term::Case(v, bs) => {
            let mut branches = BTreeMap::new();
            for (c, (x, body)) in bs {
                branches.insert(c.clone(), (x.clone(), ast_of_term(body)?));
            }
            Ast::Case(Box::new(ast_of_value_ast(v)), branches)
        }
        Term::TermVar(_) | Term::Delta(..) => return None,
    })
}

pub(crate) fn ast_of_value(v: &Value) -> Ast {
    ast_of_value_ast(v)
}

fn ast_of_value_ast(v: &Value) -> Ast {
    match v {
        Value::Var(x) => Ast::Var(x.clone()),
        Value::Lam(x, body) => match ast_of_term(body) {
            Some(b) => Ast::Lam(x.clone(), Box::new(b)),
            None => Ast::Core(Term::Val(v.clone())),
        },
        Value::Ctor(c, p) => Ast::Ctor(c.clone(), Box::new(ast_of_value_ast(p))),
        Value::Record(fs) => Ast::Record(
            fs.iter().map(|(l, v)| (l.clone(), ast_of_value_ast(v))).collect(),
        ),
        Value::Scissors => Ast::Scissors,
        Value::UnitProbe(_) => Ast::Core(Term::Val(v.clone())),
    }
}

fn rename_lambda(ast: &Ast, from: &Name, to: &Name) -> Ast {
    let sub = |t: &Term| subst_term(t, Binding::LambdaVar(from.clone(), Value::Var(to.clone())));
    match ast {
        Ast::Var(x) if x == from => Ast::Var(to.clone()),
        Ast::Var(_) | Ast::Scissors => ast.clone(),
        Ast::Lam(x, _) if x == from => ast.clone(),
        Ast::Lam(x, b) => Ast::Lam(x.clone(), Box::new(rename_lambda(b, from, to))),
        Ast::App(f, a) => {
            Ast::app(rename_lambda(f, from, to), rename_lambda(a, from, to))
        }
        Ast::Mu(a, b) => Ast::Mu(a.clone(), Box::new(rename_lambda(b, from, to))),
        Ast::Restart(e, a) => {
            Ast::Restart(Box::new(rename_lambda(e, from, to)), a.clone())
        }
        Ast::Ctor(c, p) => Ast::Ctor(c.clone(), Box::new(rename_lambda(p, from, to))),
        Ast::Record(fs) => Ast::Record(
            fs.iter().map(|(l, a)| (l.clone(), rename_lambda(a, from, to))).collect(),
        ),
        Ast::Proj(v, l) => Ast::Proj(Box::new(rename_lambda(v, from, to)), l.clone()),
        Ast::Case(v, bs) => Ast::Case(
            Box::new(rename_lambda(v, from, to)),
            bs.iter()
                .map(|(c, (x, b))| {
                    if x == from {
                        (c.clone(), (x.clone(), b.clone()))
                    } else {
                        (c.clone(), (x.clone(), rename_lambda(b, from, to)))
                    }
                })
                .collect(),
        ),
        Ast::WitnessTerm(e, u) => {
            Ast::WitnessTerm(Box::new(rename_lambda(e, from, to)), sub(u))
        }
        Ast::WitnessPred(e, p) => {
            Ast::WitnessPred(Box::new(rename_lambda(e, from, to)), p.clone())
        }
        Ast::RewriteHint(e, t, u) => {
            Ast::RewriteHint(Box::new(rename_lambda(e, from, to)), sub(t), sub(u))
        }
        Ast::Core(t) => Ast::Core(sub(t)),
    }
}

fn rename_mu(ast: &Ast, from: &Name, to: &Name) -> Ast {
    let sub = |t: &Term| {
        subst_term(
            t,
            Binding::MuVar(from.clone(), crate::syntax::Stack::Var(to.clone())),
        )
    };
    match ast {
        Ast::Var(_) | Ast::Scissors => ast.clone(),
        Ast::Lam(x, b) => Ast::Lam(x.clone(), Box::new(rename_mu(b, from, to))),
        Ast::App(f, a) => Ast::app(rename_mu(f, from, to), rename_mu(a, from, to)),
        Ast::Mu(a, _) if a == from => ast.clone(),
        Ast::Mu(a, b) => Ast::Mu(a.clone(), Box::new(rename_mu(b, from, to))),
        Ast::Restart(e, a) => {
            let a = if a == from { to.clone() } else { a.clone() };
            Ast::Restart(Box::new(rename_mu(e, from, to)), a)
        }
        Ast::Ctor(c, p) => Ast::Ctor(c.clone(), Box::new(rename_mu(p, from, to))),
        Ast::Record(fs) => Ast::Record(
            fs.iter().map(|(l, a)| (l.clone(), rename_mu(a, from, to))).collect(),
        ),
        Ast::Proj(v, l) => Ast::Proj(Box::new(rename_mu(v, from, to)), l.clone()),
        Ast::Case(v, bs) => Ast::Case(
            Box::new(rename_mu(v, from, to)),
            bs.iter()
                .map(|(c, (x, b))| (c.clone(), (x.clone(), rename_mu(b, from, to))))
                .collect(),
        ),
        Ast::WitnessTerm(e, u) => Ast::WitnessTerm(Box::new(rename_mu(e, from, to)), sub(u)),
        Ast::WitnessPred(e, p) => {
            Ast::WitnessPred(Box::new(rename_mu(e, from, to)), p.clone())
        }
        Ast::RewriteHint(e, t, u) => {
            Ast::RewriteHint(Box::new(rename_mu(e, from, to)), sub(t), sub(u))
        }
        Ast::Core(t) => Ast::Core(sub(t)),
    }
}

fn rename_pred_in(a: &Formula, from: &Name, to: &Name) -> Formula {
    crate::checker::rename_pred(a, from, to)
}

/// Replace every occurrence of `needle` (up to alpha, with no captured
/// free variables) in the formula's embedded terms by the hole variable.
pub(crate) fn abstract_term_in_formula(a: &Formula, needle: &Term, hole: &Name) -> Formula {
    let needle_fv = free_vars_term(needle);
    fn term_replace(
        t: &Term,
        needle: &Term,
        hole: &Name,
        needle_fv: &crate::syntax::VarSets,
        bound: &mut Vec<Name>,
    ) -> Term {
        if alpha_eq_term(t, needle) && !bound.iter().any(|b| needle_fv.lambda.contains(b)) {
            return Term::TermVar(hole.clone());
        }
        match t {
            Term::Val(v) => Term::Val(value_replace(v, needle, hole, needle_fv, bound)),
            Term::TermVar(_) => t.clone(),
            Term::App(f, a) => Term::app(
                term_replace(f, needle, hole, needle_fv, bound),
                term_replace(a, needle, hole, needle_fv, bound),
            ),
            Term::Mu(al, b) => {
                Term::Mu(al.clone(), Box::new(term_replace(b, needle, hole, needle_fv, bound)))
            }
            Term::Proc(p) => Term::Proc(Box::new(crate::syntax::Process::new(
                term_replace(&p.term, needle, hole, needle_fv, bound),
                p.stack.clone(),
            ))),
            Term::Proj(v, l) => Term::Proj(
                Box::new(value_replace(v, needle, hole, needle_fv, bound)),
                l.clone(),
            ),
            Term::Case(v, bs) => Term::Case(
                Box::new(value_replace(v, needle, hole, needle_fv, bound)),
                bs.iter()
                    .map(|(c, (x, b))| {
                        bound.push(x.clone());
                        let b = term_replace(b, needle, hole, needle_fv, bound);
                        bound.pop();
                        (c.clone(), (x.clone(), b))
                    })
                    .collect(),
            ),
            Term::Delta(v, w) => Term::Delta(
                Box::new(value_replace(v, needle, hole, needle_fv, bound)),
                Box::new(value_replace(w, needle, hole, needle_fv, bound)),
            ),
        }
    }
    fn value_replace(
        v: &Value,
        needle: &Term,
        hole: &Name,
        needle_fv: &crate::syntax::VarSets,
        bound: &mut Vec<Name>,
    ) -> Value {
        match v {
            Value::Var(_) | Value::Scissors => v.clone(),
            Value::Lam(x, b) => {
                bound.push(x.clone());
                let b = term_replace(b, needle, hole, needle_fv, bound);
                bound.pop();
                Value::Lam(x.clone(), Box::new(b))
            }
            Value::Ctor(c, p) => Value::Ctor(
                c.clone(),
                Box::new(value_replace(p, needle, hole, needle_fv, bound)),
            ),
            Value::Record(fs) => Value::Record(
                fs.iter()
                    .map(|(l, v)| (l.clone(), value_replace(v, needle, hole, needle_fv, bound)))
                    .collect(),
            ),
            Value::UnitProbe(p) => Value::UnitProbe(Box::new(value_replace(
                p, needle, hole, needle_fv, bound,
            ))),
        }
    }
    fn go(a: &Formula, needle: &Term, hole: &Name, fv: &crate::syntax::VarSets) -> Formula {
        let tr = |t: &Term| term_replace(t, needle, hole, fv, &mut Vec::new());
        match a {
            Formula::PredApp(x, args) => {
                Formula::PredApp(x.clone(), args.iter().map(tr).collect())
            }
            Formula::Arrow(l, r) => Formula::Arrow(
                Box::new(go(l, needle, hole, fv)),
                Box::new(go(r, needle, hole, fv)),
            ),
            Formula::ForallTerm(b, body) if !fv.term.contains(b) => {
                Formula::ForallTerm(b.clone(), Box::new(go(body, needle, hole, fv)))
            }
            Formula::ExistsTerm(b, body) if !fv.term.contains(b) => {
                Formula::ExistsTerm(b.clone(), Box::new(go(body, needle, hole, fv)))
            }
            Formula::ForallTerm(..) | Formula::ExistsTerm(..) => a.clone(),
            Formula::ForallPred(x, n, body) => {
                Formula::ForallPred(x.clone(), *n, Box::new(go(body, needle, hole, fv)))
            }
            Formula::ExistsPred(x, n, body) => {
                Formula::ExistsPred(x.clone(), *n, Box::new(go(body, needle, hole, fv)))
            }
            Formula::RecordTy(fs) => Formula::RecordTy(
                fs.iter().map(|(l, a)| (l.clone(), go(a, needle, hole, fv))).collect(),
            ),
            Formula::VariantTy(cs) => Formula::VariantTy(
                cs.iter().map(|(c, a)| (c.clone(), go(a, needle, hole, fv))).collect(),
            ),
            Formula::Member(t, a) => {
                Formula::Member(Box::new(tr(t)), Box::new(go(a, needle, hole, fv)))
            }
            Formula::Restrict(a, t, u) => Formula::Restrict(
                Box::new(go(a, needle, hole, fv)),
                Box::new(tr(t)),
                Box::new(tr(u)),
            ),
            Formula::Named(_) => a.clone(),
        }
    }
    go(a, needle, hole, &needle_fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::validate;
    use crate::types::{sugar_bot, sugar_equation, sugar_pi, sugar_top, unit_singleton};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn z_val() -> Value {
        Value::Ctor(n("Z"), Box::new(Value::unit()))
    }

    fn z() -> Term {
        Term::Val(z_val())
    }

    fn s_of(t: Value) -> Value {
        Value::Ctor(n("S"), Box::new(t))
    }

    /// nat = [Z[] | S[nat]] with the unit-singleton payload for Z.
    fn nat_table() -> TypeTable {
        let mut cs = BTreeMap::new();
        cs.insert(n("Z"), unit_singleton());
        cs.insert(n("S"), Formula::Named(n("nat")));
        let mut t = TypeTable::default();
        t.register(n("nat"), Formula::VariantTy(cs)).unwrap();
        t
    }

    fn empty_ctx() -> TypingContext {
        TypingContext::default()
    }

    /// The desugared body of `add`: λn λm case n {Z[z] → m | S[nn] → (λx S[x]) (add nn m)}.
    fn add_body() -> Ast {
        let rec_call = Ast::app(
            Ast::app(Ast::var("add"), Ast::var("nn")),
            Ast::var("m"),
        );
        let succ = Ast::app(
            Ast::lam("x", Ast::Ctor(n("S"), Box::new(Ast::var("x")))),
            rec_call,
        );
        let mut branches = BTreeMap::new();
        branches.insert(n("Z"), (n("z"), Ast::var("m")));
        branches.insert(n("S"), (n("nn"), succ));
        Ast::lam(
            "n",
            Ast::lam("m", Ast::Case(Box::new(Ast::var("n")), branches)),
        )
    }

    /// Global context after declaring `add` (unannotated: hypothesis at ⊤
    /// plus its definitional equation).
    fn global_with_add() -> TypingContext {
        let mut ctx = TypingContext::default();
        ctx.push(ContextEntry::LambdaHyp(n("add"), sugar_top()));
        ctx.push(ContextEntry::EquivHyp(Term::var("add"), add_body().erase()));
        ctx
    }

    #[test]
    fn polymorphic_identity() {
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        let goal = Formula::ForallPred(
            n("X"),
            0,
            Box::new(Formula::Arrow(
                Box::new(Formula::PredApp(n("X"), vec![])),
                Box::new(Formula::PredApp(n("X"), vec![])),
            )),
        );
        let (d, _) = checker
            .check_term_toplevel(&empty_ctx(), &Ast::lam("x", Ast::var("x")), &goal)
            .expect("identity checks");
        let rules = d.rules_used();
        assert!(rules.contains(&RuleTag::ForallPredI));
        assert!(rules.contains(&RuleTag::ArrowI));
        assert!(rules.contains(&RuleTag::Ax));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn identity_does_not_prove_bottom() {
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        let r = checker.check_term_toplevel(&empty_ctx(), &Ast::lam("x", Ast::var("x")), &sugar_bot());
        assert!(r.is_err());
    }

    #[test]
    fn scissors_in_contradictory_context() {
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        let mut ctx = TypingContext::default();
        ctx.push(ContextEntry::EquivHyp(
            z(),
            Term::Val(Value::Ctor(n("D"), Box::new(Value::unit()))),
        ));
        let (d, _) = checker
            .check_term_toplevel(&ctx, &Ast::Scissors, &sugar_bot())
            .expect("✂ discharges ⊥ in a contradictory context");
        assert!(d.rules_used().contains(&RuleTag::Scissors));
        assert!(validate(&table, &Budget::default(), &d));
        // and at an arbitrary goal
        let (d2, _) = checker
            .check_term_toplevel(&ctx, &Ast::Scissors, &Formula::Named(n("nat")))
            .expect("✂ at any goal");
        assert!(d2.rules_used().contains(&RuleTag::ForallPredE));
    }

    #[test]
    fn scissors_rejected_in_empty_context() {
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        assert!(checker
            .check_term_toplevel(&empty_ctx(), &Ast::Scissors, &sugar_bot())
            .is_err());
    }

    #[test]
    fn nat_literal_checks() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let two = Ast::Ctor(
            n("S"),
            Box::new(Ast::Ctor(
                n("S"),
                Box::new(Ast::Ctor(n("Z"), Box::new(Ast::Record(BTreeMap::new())))),
            )),
        );
        let (d, core) = checker
            .check_term_toplevel(&empty_ctx(), &two, &Formula::Named(n("nat")))
            .expect("S[S[Z[]]] : nat");
        assert_eq!(core, Term::Val(s_of(s_of(z_val()))));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn wrong_ctor_fails() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let bad = Ast::Ctor(n("Q"), Box::new(Ast::Record(BTreeMap::new())));
        assert!(checker
            .check_term_toplevel(&empty_ctx(), &bad, &Formula::Named(n("nat")))
            .is_err());
    }

    /// `addZeroN n:nat : (add Z[] n ≡ n) = ✂` — the first program proof.
    #[test]
    fn add_zero_n() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let ctx = global_with_add();
        let goal = sugar_pi(
            n("n"),
            Formula::Named(n("nat")),
            sugar_equation(
                Term::app(Term::app(Term::var("add"), z()), Term::TermVar(n("n"))),
                Term::TermVar(n("n")),
            ),
        );
        let body = Ast::lam("n", Ast::Scissors);
        let (d, _) = checker
            .check_term_toplevel(&ctx, &body, &goal)
            .unwrap_or_else(|e| panic!("addZeroN fails:\n{e}"));
        assert!(validate(&table, &Budget::default(), &d), "validation");
    }

    /// `addNZero n:nat : (add n Z[] ≡ n)` by case analysis and induction.
    #[test]
    fn add_n_zero() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let mut ctx = global_with_add();
        let goal = sugar_pi(
            n("n"),
            Formula::Named(n("nat")),
            sugar_equation(
                Term::app(Term::app(Term::var("add"), Term::TermVar(n("n"))), z()),
                Term::TermVar(n("n")),
            ),
        );
        // the recursive hypothesis, as the rec elaboration provides it
        ctx.push(ContextEntry::LambdaHyp(n("addNZero"), goal.clone()));
        let mut branches = BTreeMap::new();
        branches.insert(n("Z"), (n("zz"), Ast::Scissors));
        // S[nn] → let r = addNZero nn in ✂
        let rec_call = Ast::app(Ast::var("addNZero"), Ast::var("nn"));
        let let_in = Ast::app(Ast::lam("r", Ast::Scissors), rec_call);
        branches.insert(n("S"), (n("nn"), let_in));
        let body = Ast::lam("n", Ast::Case(Box::new(Ast::var("n")), branches));
        let (d, _) = checker
            .check_term_toplevel(&ctx, &body, &goal)
            .unwrap_or_else(|e| panic!("addNZero fails:\n{e}"));
        assert!(validate(&table, &Budget::default(), &d), "validation");
    }

    /// The dependent application with a non-value argument goes through
    /// the derived rule when the argument is provably equal to a value.
    /// The type of a fully annotated `add`: Π n:nat Π m:nat nat.
    fn add_annotated_type() -> Formula {
        sugar_pi(
            n("n"),
            Formula::Named(n("nat")),
            sugar_pi(n("m"), Formula::Named(n("nat")), Formula::Named(n("nat"))),
        )
    }

    /// Global context with an annotated `add` plus its equation.
    fn global_with_annotated_add() -> TypingContext {
        let mut ctx = TypingContext::default();
        ctx.push(ContextEntry::LambdaHyp(n("add"), add_annotated_type()));
        ctx.push(ContextEntry::EquivHyp(Term::var("add"), add_body().erase()));
        ctx
    }

    #[test]
    fn annotated_add_checks_against_its_type() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let mut ctx = TypingContext::default();
        // the recursive hypothesis, as the rec elaboration provides it
        ctx.push(ContextEntry::LambdaHyp(n("add"), add_annotated_type()));
        let (d, _) = checker
            .check_term_toplevel(&ctx, &add_body(), &add_annotated_type())
            .unwrap_or_else(|e| panic!("add fails:\n{e}"));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn semantical_restriction_application() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let mut ctx = global_with_annotated_add();
        let claim = sugar_pi(
            n("n"),
            Formula::Named(n("nat")),
            sugar_equation(Term::TermVar(n("n")), Term::TermVar(n("n"))),
        );
        ctx.push(ContextEntry::LambdaHyp(n("refl"), claim));
        // refl (add Z[] Z[]) — the argument is not a value
        let arg = Ast::app(Ast::app(Ast::var("add"), Ast::Core(z())), Ast::Core(z()));
        let app = Ast::app(Ast::var("refl"), arg);
        let goal = sugar_equation(
            Term::app(Term::app(Term::var("add"), z()), z()),
            Term::app(Term::app(Term::var("add"), z()), z()),
        );
        let (d, _) = checker
            .check_term_toplevel(&ctx, &app, &goal)
            .unwrap_or_else(|e| panic!("dependent application fails:\n{e}"));
        assert!(d.rules_used().contains(&RuleTag::MacroPiEEq));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn semantical_restriction_rejects_opaque_argument() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let mut ctx = global_with_annotated_add();
        let claim = sugar_pi(
            n("n"),
            Formula::Named(n("nat")),
            sugar_equation(Term::TermVar(n("n")), Term::TermVar(n("n"))),
        );
        ctx.push(ContextEntry::LambdaHyp(n("refl"), claim));
        ctx.push(ContextEntry::LambdaHyp(
            n("f"),
            Formula::Arrow(Box::new(Formula::Named(n("nat"))), Box::new(Formula::Named(n("nat")))),
        ));
        ctx.push(ContextEntry::LambdaHyp(n("y"), Formula::Named(n("nat"))));
        // f y is not a value and nothing relates it to one
        let app = Ast::app(Ast::var("refl"), Ast::app(Ast::var("f"), Ast::var("y")));
        let goal = sugar_equation(
            Term::app(Term::var("f"), Term::var("y")),
            Term::app(Term::var("f"), Term::var("y")),
        );
        assert!(checker.check_term_toplevel(&ctx, &app, &goal).is_err());
    }

    #[test]
    fn tampered_derivation_rejected() {
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        let goal = Formula::ForallPred(
            n("X"),
            0,
            Box::new(Formula::Arrow(
                Box::new(Formula::PredApp(n("X"), vec![])),
                Box::new(Formula::PredApp(n("X"), vec![])),
            )),
        );
        let (d, _) = checker
            .check_term_toplevel(&empty_ctx(), &Ast::lam("x", Ast::var("x")), &goal)
            .unwrap();
        // violate the freshness side condition by hand
        let mut tampered = d.clone();
        fn strip_freshness(d: &mut Derivation) {
            d.side.retain(|s| !matches!(s, SideCondition::Freshness(_)));
            for p in &mut d.premises {
                strip_freshness(p);
            }
        }
        strip_freshness(&mut tampered);
        assert!(!validate(&table, &Budget::default(), &tampered));
        // forge the conclusion formula
        let mut forged = d.clone();
        forged.conclusion.formula = sugar_bot();
        assert!(!validate(&table, &Budget::default(), &forged));
    }

    #[test]
    fn classical_callcc_types() {
        // fun f -> mu a -> (f (fun x -> mu b -> x * a)) * a
        // : ((X ⇒ Y) ⇒ X) ⇒ X
        let table = TypeTable::default();
        let checker = Checker::new(&table, Budget::default());
        let x0 = || Formula::PredApp(n("X"), vec![]);
        let y0 = || Formula::PredApp(n("Y"), vec![]);
        let goal = Formula::ForallPred(
            n("X"),
            0,
            Box::new(Formula::ForallPred(
                n("Y"),
                0,
                Box::new(Formula::Arrow(
                    Box::new(Formula::Arrow(
                        Box::new(Formula::Arrow(Box::new(x0()), Box::new(y0()))),
                        Box::new(x0()),
                    )),
                    Box::new(x0()),
                )),
            )),
        );
        let inner = Ast::lam(
            "x",
            Ast::Mu(n("b"), Box::new(Ast::Restart(Box::new(Ast::var("x")), n("a")))),
        );
        let body = Ast::Mu(
            n("a"),
            Box::new(Ast::Restart(
                Box::new(Ast::app(Ast::var("f"), inner)),
                n("a"),
            )),
        );
        let callcc = Ast::lam("f", body);
        let (d, _) = checker
            .check_term_toplevel(&empty_ctx(), &callcc, &goal)
            .unwrap_or_else(|e| panic!("callcc fails:\n{e}"));
        assert!(d.rules_used().contains(&RuleTag::Mu));
        assert!(d.rules_used().contains(&RuleTag::Star));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn dead_branch_discharged_by_scissors() {
        // case Z[] {Z[z] → Z[] | S[p] → ✂} : nat — the S branch is dead
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let mut branches = BTreeMap::new();
        branches.insert(n("Z"), (n("zz"), Ast::Ctor(n("Z"), Box::new(Ast::Record(BTreeMap::new())))));
        branches.insert(n("S"), (n("p"), Ast::Scissors));
        let scrut = Ast::Ctor(n("Z"), Box::new(Ast::Record(BTreeMap::new())));
        let case = Ast::Case(Box::new(scrut), branches);
        let (d, _) = checker
            .check_term_toplevel(&empty_ctx(), &case, &Formula::Named(n("nat")))
            .unwrap_or_else(|e| panic!("dead branch fails:\n{e}"));
        assert!(d.rules_used().contains(&RuleTag::Scissors));
        assert!(validate(&table, &Budget::default(), &d));
    }

    #[test]
    fn semantical_restriction_examples() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let ctx = global_with_add();
        // a term that computes to a value through the definitional
        // equation: add Z[] Z[] ≡ Z[]
        let u = Term::app(Term::app(Term::var("add"), z()), z());
        let (v, verdict) = checker
            .semantical_restriction(&ctx, &u)
            .expect("add Z[] Z[] is equivalent to a value");
        assert_eq!(v, z_val());
        assert!(verdict.is_proved());
        // a value is its own witness, by reflexivity
        let (v, verdict) = checker
            .semantical_restriction(&ctx, &z())
            .expect("a value is equivalent to itself");
        assert_eq!(v, z_val());
        assert!(verdict.is_proved());
        // a free term variable with no information yields nothing
        assert!(checker
            .semantical_restriction(&TypingContext::default(), &Term::TermVar(n("a")))
            .is_none());
    }

    #[test]
    fn weakening_preserves_success() {
        let table = nat_table();
        let checker = Checker::new(&table, Budget::default());
        let two = Ast::Ctor(n("S"), Box::new(Ast::Ctor(n("Z"), Box::new(Ast::Record(BTreeMap::new())))));
        let goal = Formula::Named(n("nat"));
        assert!(checker.check_term_toplevel(&empty_ctx(), &two, &goal).is_ok());
        let mut ctx = TypingContext::default();
        ctx.push(ContextEntry::LambdaHyp(n("unused"), sugar_top()));
        ctx.push(ContextEntry::TermDecl(n("unused_term")));
        assert!(checker.check_term_toplevel(&ctx, &two, &goal).is_ok());
    }
}
