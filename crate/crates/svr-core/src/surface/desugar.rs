//! From parsed syntax to checker input and core terms: resolve names,
//! apply the value-position sugars, build Π-telescopes from parameter
//! annotations, process declarations in order, and link definitions into
//! closed runnable terms.

use crate::checker::{
    validate, Ast, Checker, Derivation, Judgement, RuleTag, SideCondition, TypeTable,
};
use crate::equivalence::{decide, Budget, Polarity, Verdict};
use crate::surface::{Decl, Diagnostic, Param, SExpr, SFormula, Span};
use crate::syntax::{free_vars_term, fresh, subst_term, Binding, Name, Term, Value};
use crate::types::{
    restrict_to_equational, sugar_bot, sugar_equation, sugar_inequation, sugar_pi, sugar_top,
    unit_singleton, ContextEntry, Formula, TypingContext,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclStatus {
    Ok,
    AssumesTotality,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclKind {
    Type,
    Let,
    Assert,
    Check,
}

/// Per-declaration outcome, consumed by the report layer.
#[derive(Clone, Debug)]
pub struct DeclOutcome {
    pub name: String,
    pub kind: DeclKind,
    pub status: DeclStatus,
    pub detail: Option<String>,
    pub derivation: Option<Derivation>,
    pub verdict: Option<Verdict>,
}

/// A processed definition.
#[derive(Clone, Debug)]
pub struct DefInfo {
    /// Core term with other definitions (and recursive occurrences) as
    /// free lambda-variables.
    pub core: Term,
    /// Checker input, kept for re-checking against `check` goals.
    pub ast: Ast,
    pub recursive: bool,
    pub annot: Option<Formula>,
}

/// An elaborated module: type table, global context (hypotheses plus
/// definitional equations), definitions and per-declaration outcomes.
pub struct Module {
    pub table: TypeTable,
    pub ctx: TypingContext,
    pub defs: BTreeMap<Name, DefInfo>,
    pub def_order: Vec<Name>,
    pub decls: Vec<DeclOutcome>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Module {
    pub fn failed(&self) -> bool {
        self.decls.iter().any(|d| d.status == DeclStatus::Failed)
            || self
                .diagnostics
                .iter()
                .any(|d| d.severity == crate::surface::Severity::Error)
    }
}

struct Scope<'a> {
    src: &'a str,
    lambda: BTreeSet<Name>,
    mu: BTreeSet<Name>,
    term_vars: Vec<Name>,
    diags: Vec<Diagnostic>,
}

impl<'a> Scope<'a> {
    fn new(src: &'a str) -> Scope<'a> {
        Scope {
            src,
            lambda: BTreeSet::new(),
            mu: BTreeSet::new(),
            term_vars: Vec::new(),
            diags: Vec::new(),
        }
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(self.src, span, msg));
    }
}

// ---------------------------------------------------------------------------
// Expression desugaring.

fn desugar_expr(e: &SExpr, scope: &mut Scope) -> Ast {
    match e {
        SExpr::Var(x, span) => {
            if !scope.lambda.contains(x) && !scope.term_vars.contains(x) {
                scope.error(*span, format!("unresolved name `{x}`"));
            }
            Ast::Var(x.clone())
        }
        SExpr::Lam(params, body) => {
            let added: Vec<bool> = params.iter().map(|p| scope.lambda.insert(p.clone())).collect();
            let mut ast = desugar_expr(body, scope);
            for (p, was_new) in params.iter().zip(&added).rev() {
                if *was_new {
                    scope.lambda.remove(p);
                }
                ast = Ast::Lam(p.clone(), Box::new(ast));
            }
            ast
        }
        SExpr::App(f, a) => Ast::app(desugar_expr(f, scope), desugar_expr(a, scope)),
        SExpr::Mu(a, body) => {
            let was_new = scope.mu.insert(a.clone());
            let ast = desugar_expr(body, scope);
            if was_new {
                scope.mu.remove(a);
            }
            Ast::Mu(a.clone(), Box::new(ast))
        }
        SExpr::Restart(body, a, span) => {
            if !scope.mu.contains(a) {
                scope.error(*span, format!("no continuation `{a}` in scope"));
            }
            Ast::Restart(Box::new(desugar_expr(body, scope)), a.clone())
        }
        SExpr::Ctor(c, payload) => {
            let payload_ast = match payload {
                Some(p) => desugar_expr(p, scope),
                None => Ast::Record(BTreeMap::new()),
            };
            if payload_ast.is_value_form() {
                Ast::Ctor(c.clone(), Box::new(payload_ast))
            } else {
                // C[t] := (λx C[x]) t
                let x = fresh(&Name::new("x"));
                Ast::app(
                    Ast::Lam(x.clone(), Box::new(Ast::Ctor(c.clone(), Box::new(Ast::Var(x))))),
                    payload_ast,
                )
            }
        }
        SExpr::Record(fields) => {
            let mut out = BTreeMap::new();
            for (l, v) in fields {
                if out.contains_key(l) {
                    scope.error(
                        Span { start: 0, end: 0 },
                        format!("duplicate record label `{l}`"),
                    );
                }
                out.insert(l.clone(), desugar_expr(v, scope));
            }
            if out.values().all(Ast::is_value_form) {
                Ast::Record(out)
            } else {
                // {l = t; …} := (λx₁ (λx₂ … {l = x₁; …}) t₂) t₁ — nested
                // redexes, fields evaluated in label order
                let mut bindings = Vec::new();
                let mut value_fields = BTreeMap::new();
                for (l, a) in out {
                    if a.is_value_form() {
                        value_fields.insert(l, a);
                    } else {
                        let x = fresh(&Name::new("x"));
                        value_fields.insert(l, Ast::Var(x.clone()));
                        bindings.push((x, a));
                    }
                }
                let mut e = Ast::Record(value_fields);
                for (x, a) in bindings.into_iter().rev() {
                    e = Ast::app(Ast::Lam(x, Box::new(e)), a);
                }
                e
            }
        }
        SExpr::Proj(v, l) => {
            let inner = desugar_expr(v, scope);
            if inner.is_value_form() {
                Ast::Proj(Box::new(inner), l.clone())
            } else {
                // t.l := (λx x.l) t
                let x = fresh(&Name::new("x"));
                Ast::app(
                    Ast::Lam(
                        x.clone(),
                        Box::new(Ast::Proj(Box::new(Ast::Var(x)), l.clone())),
                    ),
                    inner,
                )
            }
        }
        SExpr::Match(scrut, branches) => {
            let scrut_ast = desugar_expr(scrut, scope);
            let mut out = BTreeMap::new();
            for (ctor, binder, body) in branches {
                let x = binder.clone().unwrap_or_else(|| fresh(&Name::new("p")));
                let was_new = scope.lambda.insert(x.clone());
                let body_ast = desugar_expr(body, scope);
                if was_new {
                    scope.lambda.remove(&x);
                }
                if out.insert(ctor.clone(), (x, body_ast)).is_some() {
                    scope.error(
                        Span { start: 0, end: 0 },
                        format!("duplicate branch for constructor `{ctor}`"),
                    );
                }
            }
            if scrut_ast.is_value_form() {
                Ast::Case(Box::new(scrut_ast), out)
            } else {
                // match t with … := (λx match x with …) t
                let x = fresh(&Name::new("x"));
                Ast::app(
                    Ast::Lam(x.clone(), Box::new(Ast::Case(Box::new(Ast::Var(x)), out))),
                    scrut_ast,
                )
            }
        }
        SExpr::LetIn(x, rhs, body) => {
            let rhs_ast = desugar_expr(rhs, scope);
            let was_new = scope.lambda.insert(x.clone());
            let body_ast = desugar_expr(body, scope);
            if was_new {
                scope.lambda.remove(x);
            }
            // let x = u in t := (λx t) u
            Ast::app(Ast::Lam(x.clone(), Box::new(body_ast)), rhs_ast)
        }
        SExpr::Scissors => Ast::Scissors,
        SExpr::WitnessTerm(e, u) => {
            let e_ast = desugar_expr(e, scope);
            let u_term = desugar_term(u, scope);
            Ast::WitnessTerm(Box::new(e_ast), u_term)
        }
        SExpr::WitnessPred(e, _pred_name, params, body) => {
            let e_ast = desugar_expr(e, scope);
            let mut inner_termvars = scope.term_vars.clone();
            inner_termvars.extend(params.iter().cloned());
            let saved = std::mem::replace(&mut scope.term_vars, inner_termvars);
            let body_f = desugar_formula(body, scope);
            scope.term_vars = saved;
            Ast::WitnessPred(
                Box::new(e_ast),
                crate::types::PredicateDef { params: params.clone(), body: body_f },
            )
        }
        SExpr::Rewrite(t, u, body) => {
            let t_term = desugar_term(t, scope);
            let u_term = desugar_term(u, scope);
            let body_ast = desugar_expr(body, scope);
            Ast::RewriteHint(Box::new(body_ast), t_term, u_term)
        }
    }
}

/// An expression used as an individual (inside a formula or a witness):
/// desugar, erase, then promote the formula-bound names to term
/// variables.
fn desugar_term(e: &SExpr, scope: &mut Scope) -> Term {
    let ast = desugar_expr(e, scope);
    let term = ast.erase();
    promote_term_vars(&term, &scope.term_vars)
}

/// Replace free occurrences of the given lambda-variables by term
/// variables of the same name (formulas bind individuals, but the
/// expression grammar produces lambda-variable references).
fn promote_term_vars(t: &Term, term_vars: &[Name]) -> Term {
    if term_vars.is_empty() {
        return t.clone();
    }
    let mut out = t.clone();
    for x in term_vars {
        // capture-respecting: bound occurrences are untouched because
        // substitution only replaces free ones
        let marker = Term::TermVar(x.clone());
        out = subst_with_term(&out, x, &marker);
    }
    out
}

/// Substitute a *term* for a lambda-variable. Only used to promote
/// variables to individuals, where the replacement is a leaf.
fn subst_with_term(t: &Term, x: &Name, replacement: &Term) -> Term {
    let fresh_name = fresh(x);
    let renamed = subst_term(t, Binding::LambdaVar(x.clone(), Value::Var(fresh_name.clone())));
    replace_var_by_term(&renamed, &fresh_name, replacement)
}

fn replace_var_by_term(t: &Term, x: &Name, replacement: &Term) -> Term {
    match t {
        Term::Val(Value::Var(y)) if y == x => replacement.clone(),
        Term::Val(v) => match replace_in_value(v, x, replacement) {
            Ok(v) => Term::Val(v),
            Err(()) => t.clone(),
        },
        Term::TermVar(_) => t.clone(),
        Term::App(f, a) => Term::app(
            replace_var_by_term(f, x, replacement),
            replace_var_by_term(a, x, replacement),
        ),
        Term::Mu(a, b) => Term::Mu(a.clone(), Box::new(replace_var_by_term(b, x, replacement))),
        Term::Proc(p) => Term::Proc(Box::new(crate::syntax::Process::new(
            replace_var_by_term(&p.term, x, replacement),
            p.stack.clone(),
        ))),
        Term::Proj(v, l) => match replace_in_value(v, x, replacement) {
            Ok(v) => Term::Proj(Box::new(v), l.clone()),
            Err(()) => t.clone(),
        },
        Term::Case(v, bs) => {
            let scrut = replace_in_value(v, x, replacement).unwrap_or_else(|()| (**v).clone());
            Term::Case(
                Box::new(scrut),
                bs.iter()
                    .map(|(c, (b, body))| {
                        (c.clone(), (b.clone(), replace_var_by_term(body, x, replacement)))
                    })
                    .collect(),
            )
        }
        Term::Delta(..) => t.clone(),
    }
}

/// Values can only hold the replacement when it is itself a value-shaped
/// term; a term-variable leaf in a value position stays a variable
/// reference error, reported by the checker later.
fn replace_in_value(v: &Value, x: &Name, replacement: &Term) -> Result<Value, ()> {
    Ok(match v {
        Value::Var(y) if y == x => match replacement {
            Term::Val(v) => v.clone(),
            // a term variable in a value slot cannot be represented; keep
            // the wrapped application form instead
            _ => return Err(()),
        },
        Value::Var(_) | Value::Scissors => v.clone(),
        Value::Lam(y, body) => {
            Value::Lam(y.clone(), Box::new(replace_var_by_term(body, x, replacement)))
        }
        Value::Ctor(c, p) => Value::Ctor(c.clone(), Box::new(replace_in_value(p, x, replacement)?)),
        Value::Record(fs) => {
            let mut out = BTreeMap::new();
            for (l, w) in fs {
                out.insert(l.clone(), replace_in_value(w, x, replacement)?);
            }
            Value::Record(out)
        }
        Value::UnitProbe(p) => Value::UnitProbe(Box::new(replace_in_value(p, x, replacement)?)),
    })
}

// ---------------------------------------------------------------------------
// Formula desugaring.

fn desugar_formula(f: &SFormula, scope: &mut Scope) -> Formula {
    match f {
        SFormula::Atom(name, args, span) => {
            let uppercase = name.as_str().chars().next().is_some_and(|c| c.is_uppercase());
            if uppercase {
                let args = args.iter().map(|a| desugar_term(a, scope)).collect();
                Formula::PredApp(name.clone(), args)
            } else {
                if !args.is_empty() {
                    scope.error(*span, format!("named type `{name}` takes no arguments"));
                }
                Formula::Named(name.clone())
            }
        }
        SFormula::Arrow(a, b) => Formula::Arrow(
            Box::new(desugar_formula(a, scope)),
            Box::new(desugar_formula(b, scope)),
        ),
        SFormula::ForallTerm(a, body) => {
            scope.term_vars.push(a.clone());
            let body = desugar_formula(body, scope);
            scope.term_vars.pop();
            Formula::ForallTerm(a.clone(), Box::new(body))
        }
        SFormula::ExistsTerm(a, body) => {
            scope.term_vars.push(a.clone());
            let body = desugar_formula(body, scope);
            scope.term_vars.pop();
            Formula::ExistsTerm(a.clone(), Box::new(body))
        }
        SFormula::ForallPred(x, n, body) => {
            Formula::ForallPred(x.clone(), *n, Box::new(desugar_formula(body, scope)))
        }
        SFormula::ExistsPred(x, n, body) => {
            Formula::ExistsPred(x.clone(), *n, Box::new(desugar_formula(body, scope)))
        }
        SFormula::Pi(a, dom, cod) => {
            let dom = desugar_formula(dom, scope);
            scope.term_vars.push(a.clone());
            let cod = desugar_formula(cod, scope);
            scope.term_vars.pop();
            sugar_pi(a.clone(), dom, cod)
        }
        SFormula::RecordTy(fields) => Formula::RecordTy(
            fields
                .iter()
                .map(|(l, f)| (l.clone(), desugar_formula(f, scope)))
                .collect(),
        ),
        SFormula::VariantTy(arms) => Formula::VariantTy(
            arms.iter()
                .map(|(c, payload)| {
                    let pf = match payload {
                        Some(f) => desugar_formula(f, scope),
                        None => unit_singleton(),
                    };
                    (c.clone(), pf)
                })
                .collect(),
        ),
        SFormula::Member(t, a) => Formula::Member(
            Box::new(desugar_term(t, scope)),
            Box::new(desugar_formula(a, scope)),
        ),
        SFormula::Restrict(a, t, u) => Formula::Restrict(
            Box::new(desugar_formula(a, scope)),
            Box::new(desugar_term(t, scope)),
            Box::new(desugar_term(u, scope)),
        ),
        SFormula::Equation(t, u) => {
            sugar_equation(desugar_term(t, scope), desugar_term(u, scope))
        }
        SFormula::Inequation(t, u) => {
            sugar_inequation(desugar_term(t, scope), desugar_term(u, scope))
        }
        SFormula::Bot => sugar_bot(),
        SFormula::Top => sugar_top(),
    }
}

// ---------------------------------------------------------------------------
// Module elaboration.

/// Process a module's declarations in order: register types, check
/// annotated definitions, record definitional equations, decide
/// assertions.
pub fn elaborate_module(src: &str, budget: &Budget) -> Module {
    let (parsed, mut diagnostics) = crate::surface::parse(src);
    let mut table = TypeTable::default();
    let mut ctx = TypingContext::default();
    let mut defs: BTreeMap<Name, DefInfo> = BTreeMap::new();
    let mut def_order = Vec::new();
    let mut decls = Vec::new();

    for decl in &parsed.decls {
        match decl {
            Decl::Type { name, def, span } => {
                let mut scope = Scope::new(src);
                scope.lambda.extend(defs.keys().cloned());
                let formula = desugar_formula(def, &mut scope);
                diagnostics.append(&mut scope.diags);
                match table.register(name.clone(), formula) {
                    Ok(()) => decls.push(DeclOutcome {
                        name: name.to_string(),
                        kind: DeclKind::Type,
                        status: DeclStatus::Ok,
                        detail: None,
                        derivation: None,
                        verdict: None,
                    }),
                    Err(e) => {
                        diagnostics.push(Diagnostic::error(src, *span, e.to_string()));
                        decls.push(DeclOutcome {
                            name: name.to_string(),
                            kind: DeclKind::Type,
                            status: DeclStatus::Failed,
                            detail: Some(e.to_string()),
                            derivation: None,
                            verdict: None,
                        });
                    }
                }
            }
            Decl::Let { name, params, result, body, recursive, span } => {
                let outcome = process_let(
                    src, budget, &table, &mut ctx, &mut defs, &mut def_order, &mut diagnostics,
                    name, params, result, body, *recursive, *span,
                );
                decls.push(outcome);
            }
            Decl::Assert { lhs, rhs, expect_equiv, span } => {
                let mut scope = Scope::new(src);
                scope.lambda.extend(defs.keys().cloned());
                let l = desugar_term(lhs, &mut scope);
                let r = desugar_term(rhs, &mut scope);
                let had_errors = !scope.diags.is_empty();
                diagnostics.append(&mut scope.diags);
                if had_errors {
                    decls.push(DeclOutcome {
                        name: format!("assert {l} {} {r}", if *expect_equiv { "≡" } else { "≢" }),
                        kind: DeclKind::Assert,
                        status: DeclStatus::Failed,
                        detail: Some("unresolved names".into()),
                        derivation: None,
                        verdict: None,
                    });
                    continue;
                }
                let polarity = if *expect_equiv { Polarity::Equiv } else { Polarity::Inequiv };
                let e = restrict_to_equational(&ctx);
                let verdict = decide(&e, &l, &r, polarity, budget);
                let status = if verdict.is_proved() { DeclStatus::Ok } else { DeclStatus::Failed };
                let detail = match &verdict {
                    Verdict::Proved { .. } => None,
                    Verdict::Refuted { .. } => Some("refuted".to_string()),
                    Verdict::Unknown => Some("unknown".to_string()),
                };
                if status == DeclStatus::Failed {
                    diagnostics.push(Diagnostic::error(
                        src,
                        *span,
                        format!(
                            "assertion not provable: {l} {} {r} ({})",
                            if *expect_equiv { "≡" } else { "≢" },
                            detail.clone().unwrap_or_default()
                        ),
                    ));
                }
                decls.push(DeclOutcome {
                    name: format!("assert {l} {} {r}", if *expect_equiv { "≡" } else { "≢" }),
                    kind: DeclKind::Assert,
                    status,
                    detail,
                    derivation: None,
                    verdict: Some(verdict),
                });
            }
            Decl::CheckGoal { name, formula, span } => {
                let outcome =
                    process_check_goal(src, budget, &table, &ctx, &defs, &mut diagnostics, name, formula, *span);
                decls.push(outcome);
            }
        }
    }

    Module { table, ctx, defs, def_order, decls, diagnostics }
}

#[allow(clippy::too_many_arguments)]
fn process_let(
    src: &str,
    budget: &Budget,
    table: &TypeTable,
    ctx: &mut TypingContext,
    defs: &mut BTreeMap<Name, DefInfo>,
    def_order: &mut Vec<Name>,
    diagnostics: &mut Vec<Diagnostic>,
    name: &Name,
    params: &[Param],
    result: &Option<SFormula>,
    body: &SExpr,
    recursive: bool,
    span: Span,
) -> DeclOutcome {
    let fail = |detail: String, derivation: Option<Derivation>| DeclOutcome {
        name: name.to_string(),
        kind: DeclKind::Let,
        status: DeclStatus::Failed,
        detail: Some(detail),
        derivation,
        verdict: None,
    };
    if defs.contains_key(name) {
        let msg = format!("`{name}` is already defined");
        diagnostics.push(Diagnostic::error(src, span, msg.clone()));
        return fail(msg, None);
    }

    // desugar the annotation first: the Π-telescope scopes parameters
    // left to right into the result type
    let fully_annotated = result.is_some() && params.iter().all(|p| p.annot.is_some());
    let annot: Option<Formula> = if fully_annotated {
        let mut scope = Scope::new(src);
        scope.lambda.extend(defs.keys().cloned());
        let mut doms = Vec::new();
        for p in params {
            let dom = desugar_formula(p.annot.as_ref().unwrap(), &mut scope);
            scope.term_vars.push(p.name.clone());
            doms.push(dom);
        }
        let cod = desugar_formula(result.as_ref().unwrap(), &mut scope);
        diagnostics.append(&mut scope.diags);
        let mut ty = cod;
        for (p, dom) in params.iter().zip(doms).rev() {
            ty = sugar_pi(p.name.clone(), dom, ty);
        }
        Some(ty)
    } else {
        None
    };

    // desugar the body under the parameters (and the name itself when
    // recursive)
    let mut scope = Scope::new(src);
    scope.lambda.extend(defs.keys().cloned());
    if recursive {
        scope.lambda.insert(name.clone());
    }
    for p in params {
        scope.lambda.insert(p.name.clone());
    }
    let body_ast = desugar_expr(body, &mut scope);
    let had_errors = !scope.diags.is_empty();
    diagnostics.append(&mut scope.diags);
    let mut full_ast = body_ast;
    for p in params.iter().rev() {
        full_ast = Ast::Lam(p.name.clone(), Box::new(full_ast));
    }
    if had_errors {
        return fail("unresolved names in the definition".into(), None);
    }
    if recursive && params.is_empty() {
        let msg = "a recursive definition needs at least one parameter".to_string();
        diagnostics.push(Diagnostic::error(src, span, msg.clone()));
        return fail(msg, None);
    }

    let mut outcome_status = DeclStatus::Ok;
    let mut outcome_detail = None;
    let mut derivation = None;
    let mut elaborated_core = None;
    let mut hyp_formula = sugar_top();

    if let Some(ty) = &annot {
        let checker = Checker::new(table, budget.clone());
        let check_ctx = if recursive {
            ctx.extended(ContextEntry::LambdaHyp(name.clone(), ty.clone()))
        } else {
            ctx.clone()
        };
        match checker.check_term_toplevel(&check_ctx, &full_ast, ty) {
            Ok((d, core)) => {
                let d = if recursive {
                    Derivation::with(
                        RuleTag::Rec,
                        Judgement::term(check_ctx.clone(), core.clone(), ty.clone()),
                        vec![d],
                        vec![SideCondition::AssumesTotality],
                    )
                } else {
                    d
                };
                debug_assert!(validate(table, budget, &d), "emitted derivation must replay");
                derivation = Some(d);
                elaborated_core = Some(core);
                hyp_formula = ty.clone();
                outcome_status =
                    if recursive { DeclStatus::AssumesTotality } else { DeclStatus::Ok };
            }
            Err(e) => {
                diagnostics.push(Diagnostic::error(
                    src,
                    span,
                    format!("`{name}` does not check against its annotation"),
                ));
                outcome_status = DeclStatus::Failed;
                outcome_detail = Some(e.render());
            }
        }
    } else {
        if result.is_some() {
            outcome_detail =
                Some("definition has unannotated parameters; not checked".to_string());
        }
        // every recursive definition carries the totality assumption,
        // checked or not: its unfolding equation enters the context
        if recursive {
            outcome_status = DeclStatus::AssumesTotality;
        }
    }

    let core = elaborated_core.unwrap_or_else(|| full_ast.erase());

    // global context: a typing hypothesis and the definitional equation
    ctx.push(ContextEntry::LambdaHyp(name.clone(), hyp_formula));
    ctx.push(ContextEntry::EquivHyp(Term::var(name.as_str()), core.clone()));
    defs.insert(
        name.clone(),
        DefInfo { core, ast: full_ast, recursive, annot },
    );
    def_order.push(name.clone());

    DeclOutcome {
        name: name.to_string(),
        kind: DeclKind::Let,
        status: outcome_status,
        detail: outcome_detail,
        derivation,
        verdict: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn process_check_goal(
    src: &str,
    budget: &Budget,
    table: &TypeTable,
    ctx: &TypingContext,
    defs: &BTreeMap<Name, DefInfo>,
    diagnostics: &mut Vec<Diagnostic>,
    name: &Name,
    formula: &SFormula,
    span: Span,
) -> DeclOutcome {
    let mut scope = Scope::new(src);
    scope.lambda.extend(defs.keys().cloned());
    let goal = desugar_formula(formula, &mut scope);
    diagnostics.append(&mut scope.diags);
    let Some(def) = defs.get(name) else {
        let msg = format!("`{name}` is not defined");
        diagnostics.push(Diagnostic::error(src, span, msg.clone()));
        return DeclOutcome {
            name: name.to_string(),
            kind: DeclKind::Check,
            status: DeclStatus::Failed,
            detail: Some(msg),
            derivation: None,
            verdict: None,
        };
    };
    // re-check the definition body against the stated goal; recursive
    // definitions get the goal as their recursion hypothesis
    let check_ctx = if def.recursive {
        let mut c = ctx.clone();
        for e in &mut c.entries {
            if let ContextEntry::LambdaHyp(x, f) = e {
                if x == name {
                    *f = goal.clone();
                }
            }
        }
        c
    } else {
        ctx.clone()
    };
    let checker = Checker::new(table, budget.clone());
    match checker.check_term_toplevel(&check_ctx, &def.ast, &goal) {
        Ok((d, core)) => {
            let d = if def.recursive {
                Derivation::with(
                    RuleTag::Rec,
                    Judgement::term(check_ctx, core, goal),
                    vec![d],
                    vec![SideCondition::AssumesTotality],
                )
            } else {
                d
            };
            debug_assert!(validate(table, budget, &d), "emitted derivation must replay");
            DeclOutcome {
                name: name.to_string(),
                kind: DeclKind::Check,
                status: if def.recursive { DeclStatus::AssumesTotality } else { DeclStatus::Ok },
                detail: None,
                derivation: Some(d),
                verdict: None,
            }
        }
        Err(e) => {
            diagnostics.push(Diagnostic::error(
                src,
                span,
                format!("`{name}` does not check against the goal"),
            ));
            DeclOutcome {
                name: name.to_string(),
                kind: DeclKind::Check,
                status: DeclStatus::Failed,
                detail: Some(e.render()),
                derivation: None,
                verdict: None,
            }
        }
    }
}

/// Desugar a standalone formula in an empty scope.
pub fn desugar_formula_snippet(
    src: &str,
    f: &SFormula,
) -> Result<Formula, Vec<Diagnostic>> {
    let mut scope = Scope::new(src);
    let out = desugar_formula(f, &mut scope);
    if scope.diags.is_empty() {
        Ok(out)
    } else {
        Err(scope.diags)
    }
}

/// Desugar a standalone expression in a module's scope (all definitions
/// visible), producing a core term.
pub fn desugar_expr_in_scope(
    src: &str,
    module: &Module,
    e: &SExpr,
) -> Result<Term, Vec<Diagnostic>> {
    let mut scope = Scope::new(src);
    scope.lambda.extend(module.defs.keys().cloned());
    let t = desugar_term(e, &mut scope);
    if scope.diags.is_empty() {
        Ok(t)
    } else {
        Err(scope.diags)
    }
}

// ---------------------------------------------------------------------------
// Linking.

/// Produce a closed runnable term for a definition: other definitions are
/// inlined (value definitions by substitution, term definitions through
/// an application), and a recursive definition becomes a self-applying
/// fixpoint value.
pub fn link_definition(module: &Module, name: &Name) -> Result<Term, String> {
    let mut memo: BTreeMap<Name, Term> = BTreeMap::new();
    link_inner(module, name, &mut memo)
}

fn link_inner(
    module: &Module,
    name: &Name,
    memo: &mut BTreeMap<Name, Term>,
) -> Result<Term, String> {
    if let Some(t) = memo.get(name) {
        return Ok(t.clone());
    }
    let Some(def) = module.defs.get(name) else {
        return Err(format!("`{name}` is not defined"));
    };
    let mut core = def.core.clone();
    // inline the other definitions (they can only be earlier ones)
    let mut referenced: Vec<Name> = free_vars_term(&core)
        .lambda
        .into_iter()
        .filter(|x| x != name && module.defs.contains_key(x))
        .collect();
    referenced.sort();
    for g in referenced {
        let linked = link_inner(module, &g, memo)?;
        match &linked {
            Term::Val(v) => {
                core = subst_term(&core, Binding::LambdaVar(g.clone(), v.clone()));
            }
            _ => {
                // (λg core) linked — evaluates the definition first
                core = Term::app(
                    Term::Val(Value::Lam(g.clone(), Box::new(core))),
                    linked,
                );
            }
        }
    }
    let out = if def.recursive {
        fixpoint_value(name, &core)?
    } else {
        core
    };
    memo.insert(name.clone(), out.clone());
    Ok(out)
}

/// The call-by-value fixpoint value for `name = core` where `core` is a
/// lambda mentioning `name` freely:
///
/// ```text
/// W = λs core[name := λq ((s s) q)]        V = λq ((W W) q)
/// ```
///
/// `V v` reduces to `core[name := V'] v` with `V'` alpha-equal to `V`.
fn fixpoint_value(name: &Name, core: &Term) -> Result<Term, String> {
    if !matches!(core, Term::Val(Value::Lam(..))) {
        return Err(format!("recursive definition `{name}` is not a function"));
    }
    let s = fresh(&Name::new("s"));
    let q = fresh(&Name::new("q"));
    let self_app = Value::Lam(
        q.clone(),
        Box::new(Term::app(
            Term::app(Term::var(s.as_str()), Term::var(s.as_str())),
            Term::var(q.as_str()),
        )),
    );
    let w_body = subst_term(core, Binding::LambdaVar(name.clone(), self_app));
    let w = Value::Lam(s.clone(), Box::new(w_body));
    let q2 = fresh(&Name::new("q"));
    Ok(Term::Val(Value::Lam(
        q2.clone(),
        Box::new(Term::app(
            Term::app(Term::Val(w.clone()), Term::Val(w)),
            Term::var(q2.as_str()),
        )),
    )))
}
