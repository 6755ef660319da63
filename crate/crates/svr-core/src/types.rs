//! Second-order formulas over terms, typing contexts and their validity.
//! Formulas quantify over term variables and n-ary predicate variables,
//! and embed terms through the membership predicate `t ∈ A`, the
//! restriction connective `A ↾ t ≡ u` and predicate arguments.
//!
//! `⊥`, `⊤`, equations, inequations and the dependent product are all
//! encoded, never primitive:
//!
//! ```text
//! ⊥ = ∀X₀ X₀        ⊤ = ∃X₀ X₀        t ≡ u = ⊤ ↾ t ≡ u
//! t ≢ u = (⊤ ↾ t ≡ u) ⇒ ⊥             Π a:A B = ∀a (a ∈ A ⇒ B)
//! ```

use crate::equivalence::{Claim, EquationalContext};
use crate::syntax::{
    free_vars_term, fresh, subst_term, Binding, Canon, Name, Term, VarSets,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    /// `X(t₁, …, tₙ)`; a bare predicate variable when the list is empty.
    PredApp(Name, Vec<Term>),
    /// `A ⇒ B`
    Arrow(Box<Formula>, Box<Formula>),
    /// `∀a A` over individuals (terms)
    ForallTerm(Name, Box<Formula>),
    /// `∃a A`
    ExistsTerm(Name, Box<Formula>),
    /// `∀X A` over n-ary predicates; the arity is recorded at the binder
    ForallPred(Name, usize, Box<Formula>),
    /// `∃X A`
    ExistsPred(Name, usize, Box<Formula>),
    /// `{l₁ : A₁; …}`
    RecordTy(BTreeMap<Name, Formula>),
    /// `[C₁[A₁] | …]`
    VariantTy(BTreeMap<Name, Formula>),
    /// `t ∈ A`
    Member(Box<Term>, Box<Formula>),
    /// `A ↾ t ≡ u`
    Restrict(Box<Formula>, Box<Term>, Box<Term>),
    /// A reference to a declared type name; unfolding policy lives with
    /// the surface elaborator and the checker.
    Named(Name),
}

pub fn sugar_bot() -> Formula {
    let x = Name::new("X0");
    Formula::ForallPred(x.clone(), 0, Box::new(Formula::PredApp(x, vec![])))
}

pub fn sugar_top() -> Formula {
    let x = Name::new("X0");
    Formula::ExistsPred(x.clone(), 0, Box::new(Formula::PredApp(x, vec![])))
}

pub fn sugar_equation(t: Term, u: Term) -> Formula {
    Formula::Restrict(Box::new(sugar_top()), Box::new(t), Box::new(u))
}

pub fn sugar_inequation(t: Term, u: Term) -> Formula {
    Formula::Arrow(Box::new(sugar_equation(t, u)), Box::new(sugar_bot()))
}

pub fn sugar_pi(a: Name, dom: Formula, cod: Formula) -> Formula {
    Formula::ForallTerm(
        a.clone(),
        Box::new(Formula::Arrow(
            Box::new(Formula::Member(Box::new(Term::TermVar(a)), Box::new(dom))),
            Box::new(cod),
        )),
    )
}

/// The singleton type of the empty record, `{} ∈ {}`. Used as the payload
/// type of constructors declared without one, so that case analysis
/// learns the payload's identity.
pub fn unit_singleton() -> Formula {
    Formula::Member(
        Box::new(Term::Val(crate::syntax::Value::unit())),
        Box::new(Formula::RecordTy(BTreeMap::new())),
    )
}

impl Formula {
    pub fn is_bot(&self) -> bool {
        match self {
            Formula::ForallPred(x, 0, body) => {
                matches!(&**body, Formula::PredApp(y, args) if y == x && args.is_empty())
            }
            _ => false,
        }
    }

    pub fn is_top(&self) -> bool {
        match self {
            Formula::ExistsPred(x, 0, body) => {
                matches!(&**body, Formula::PredApp(y, args) if y == x && args.is_empty())
            }
            _ => false,
        }
    }

    /// Recognize the equation encoding `⊤ ↾ t ≡ u`.
    pub fn as_equation(&self) -> Option<(&Term, &Term)> {
        match self {
            Formula::Restrict(a, t, u) if a.is_top() => Some((t, u)),
            _ => None,
        }
    }

    /// Recognize the dependent product encoding `∀a (a ∈ A ⇒ B)`.
    pub fn as_pi(&self) -> Option<(&Name, &Formula, &Formula)> {
        match self {
            Formula::ForallTerm(a, body) => match &**body {
                Formula::Arrow(dom, cod) => match &**dom {
                    Formula::Member(t, d) => match &**t {
                        Term::TermVar(b) if b == a => Some((a, d, cod)),
                        _ => None,
                    },
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        }
    }
}

/// Free variables of a formula, per namespace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormulaVars {
    pub lambda: BTreeSet<Name>,
    pub mu: BTreeSet<Name>,
    pub term: BTreeSet<Name>,
    pub pred: BTreeSet<Name>,
}

impl FormulaVars {
    fn absorb_term_vars(&mut self, fv: VarSets) {
        self.lambda.extend(fv.lambda);
        self.mu.extend(fv.mu);
        self.term.extend(fv.term);
    }

    fn union(mut self, other: FormulaVars) -> FormulaVars {
        self.lambda.extend(other.lambda);
        self.mu.extend(other.mu);
        self.term.extend(other.term);
        self.pred.extend(other.pred);
        self
    }
}

pub fn formula_free_vars(a: &Formula) -> FormulaVars {
    match a {
        Formula::PredApp(x, args) => {
            let mut fv = FormulaVars::default();
            fv.pred.insert(x.clone());
            for t in args {
                fv.absorb_term_vars(free_vars_term(t));
            }
            fv
        }
        Formula::Arrow(a, b) => formula_free_vars(a).union(formula_free_vars(b)),
        Formula::ForallTerm(a, body) | Formula::ExistsTerm(a, body) => {
            let mut fv = formula_free_vars(body);
            fv.term.remove(a);
            fv
        }
        Formula::ForallPred(x, _, body) | Formula::ExistsPred(x, _, body) => {
            let mut fv = formula_free_vars(body);
            fv.pred.remove(x);
            fv
        }
        Formula::RecordTy(fs) => fs
            .values()
            .fold(FormulaVars::default(), |acc, a| acc.union(formula_free_vars(a))),
        Formula::VariantTy(cs) => cs
            .values()
            .fold(FormulaVars::default(), |acc, a| acc.union(formula_free_vars(a))),
        Formula::Member(t, a) => {
            let mut fv = formula_free_vars(a);
            fv.absorb_term_vars(free_vars_term(t));
            fv
        }
        Formula::Restrict(a, t, u) => {
            let mut fv = formula_free_vars(a);
            fv.absorb_term_vars(free_vars_term(t));
            fv.absorb_term_vars(free_vars_term(u));
            fv
        }
        Formula::Named(_) => FormulaVars::default(),
    }
}

/// A predicate substituend: parameter term variables and a body formula.
/// This is the syntactic fragment of the model's set-theoretic predicate
/// functions that witnesses can actually name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDef {
    pub params: Vec<Name>,
    pub body: Formula,
}

impl PredicateDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug)]
pub enum FormulaBinding {
    /// `[a := t]`
    Term(Name, Term),
    /// `[X := (a₁…aₙ, B)]`
    Pred(Name, PredicateDef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArityMismatch {
    pub pred: Name,
    pub expected: usize,
    pub got: usize,
}

impl fmt::Display for ArityMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "predicate {} applied to {} arguments, definition takes {}",
            self.pred, self.got, self.expected
        )
    }
}

/// Capture-avoiding substitution into a formula. Predicate substitution
/// binds the definition's parameters to the application's arguments.
pub fn formula_subst(a: &Formula, binding: &FormulaBinding) -> Result<Formula, ArityMismatch> {
    match a {
        Formula::PredApp(x, args) => match binding {
            FormulaBinding::Term(b, t) => {
                let args = args
                    .iter()
                    .map(|arg| subst_term(arg, Binding::TermVar(b.clone(), t.clone())))
                    .collect();
                Ok(Formula::PredApp(x.clone(), args))
            }
            FormulaBinding::Pred(y, def) if y == x => {
                if def.params.len() != args.len() {
                    return Err(ArityMismatch {
                        pred: x.clone(),
                        expected: def.params.len(),
                        got: args.len(),
                    });
                }
                // simultaneous parameter binding: rename parameters apart
                // first, then substitute one by one
                let fresh_params: Vec<Name> = def.params.iter().map(fresh).collect();
                let mut body = def.body.clone();
                for (p, fp) in def.params.iter().zip(&fresh_params) {
                    body = formula_subst(
                        &body,
                        &FormulaBinding::Term(p.clone(), Term::TermVar(fp.clone())),
                    )?;
                }
                for (fp, arg) in fresh_params.iter().zip(args) {
                    body = formula_subst(&body, &FormulaBinding::Term(fp.clone(), arg.clone()))?;
                }
                Ok(body)
            }
            FormulaBinding::Pred(..) => Ok(a.clone()),
        },
        Formula::Arrow(l, r) => Ok(Formula::Arrow(
            Box::new(formula_subst(l, binding)?),
            Box::new(formula_subst(r, binding)?),
        )),
        Formula::ForallTerm(b, body) => {
            let (b, body) = enter_term_binder(b, body, binding)?;
            match &binding {
                FormulaBinding::Term(c, _) if *c == b => Ok(Formula::ForallTerm(b, body)),
                _ => Ok(Formula::ForallTerm(
                    b,
                    Box::new(formula_subst(&body, binding)?),
                )),
            }
        }
        Formula::ExistsTerm(b, body) => {
            let (b, body) = enter_term_binder(b, body, binding)?;
            match &binding {
                FormulaBinding::Term(c, _) if *c == b => Ok(Formula::ExistsTerm(b, body)),
                _ => Ok(Formula::ExistsTerm(
                    b,
                    Box::new(formula_subst(&body, binding)?),
                )),
            }
        }
        Formula::ForallPred(x, n, body) => {
            let (x, body) = enter_pred_binder(x, body, binding)?;
            match &binding {
                FormulaBinding::Pred(y, _) if *y == x => Ok(Formula::ForallPred(x, *n, body)),
                _ => Ok(Formula::ForallPred(
                    x,
                    *n,
                    Box::new(formula_subst(&body, binding)?),
                )),
            }
        }
        Formula::ExistsPred(x, n, body) => {
            let (x, body) = enter_pred_binder(x, body, binding)?;
            match &binding {
                FormulaBinding::Pred(y, _) if *y == x => Ok(Formula::ExistsPred(x, *n, body)),
                _ => Ok(Formula::ExistsPred(
                    x,
                    *n,
                    Box::new(formula_subst(&body, binding)?),
                )),
            }
        }
        Formula::RecordTy(fs) => {
            let mut out = BTreeMap::new();
            for (l, a) in fs {
                out.insert(l.clone(), formula_subst(a, binding)?);
            }
            Ok(Formula::RecordTy(out))
        }
        Formula::VariantTy(cs) => {
            let mut out = BTreeMap::new();
            for (c, a) in cs {
                out.insert(c.clone(), formula_subst(a, binding)?);
            }
            Ok(Formula::VariantTy(out))
        }
        Formula::Member(t, a) => Ok(Formula::Member(
            Box::new(subst_into_term(t, binding)),
            Box::new(formula_subst(a, binding)?),
        )),
        Formula::Restrict(a, t, u) => Ok(Formula::Restrict(
            Box::new(formula_subst(a, binding)?),
            Box::new(subst_into_term(t, binding)),
            Box::new(subst_into_term(u, binding)),
        )),
        Formula::Named(n) => Ok(Formula::Named(n.clone())),
    }
}

fn subst_into_term(t: &Term, binding: &FormulaBinding) -> Term {
    match binding {
        FormulaBinding::Term(a, u) => subst_term(t, Binding::TermVar(a.clone(), u.clone())),
        FormulaBinding::Pred(..) => t.clone(),
    }
}

/// Rename a term-variable binder when the substitution could capture it.
fn enter_term_binder(
    b: &Name,
    body: &Formula,
    binding: &FormulaBinding,
) -> Result<(Name, Box<Formula>), ArityMismatch> {
    let needs_rename = match binding {
        FormulaBinding::Term(a, t) => a != b && free_vars_term(t).term.contains(b),
        FormulaBinding::Pred(_, def) => {
            let mut fv = formula_free_vars(&def.body);
            for p in &def.params {
                fv.term.remove(p);
            }
            fv.term.contains(b)
        }
    };
    if needs_rename {
        let b2 = fresh(b);
        let body = formula_subst(
            body,
            &FormulaBinding::Term(b.clone(), Term::TermVar(b2.clone())),
        )?;
        Ok((b2, Box::new(body)))
    } else {
        Ok((b.clone(), Box::new(body.clone())))
    }
}

fn enter_pred_binder(
    x: &Name,
    body: &Formula,
    binding: &FormulaBinding,
) -> Result<(Name, Box<Formula>), ArityMismatch> {
    let needs_rename = match binding {
        FormulaBinding::Term(..) => false,
        FormulaBinding::Pred(y, def) => {
            y != x && {
                let mut fv = formula_free_vars(&def.body);
                for p in &def.params {
                    fv.term.remove(p);
                }
                fv.pred.contains(x)
            }
        }
    };
    if needs_rename {
        let x2 = fresh(x);
        let body = rename_pred_var(body, x, &x2);
        Ok((x2, Box::new(body)))
    } else {
        Ok((x.clone(), Box::new(body.clone())))
    }
}

fn rename_pred_var(a: &Formula, from: &Name, to: &Name) -> Formula {
    match a {
        Formula::PredApp(x, args) if x == from => Formula::PredApp(to.clone(), args.clone()),
        Formula::PredApp(..) | Formula::Named(_) => a.clone(),
        Formula::Arrow(l, r) => Formula::Arrow(
            Box::new(rename_pred_var(l, from, to)),
            Box::new(rename_pred_var(r, from, to)),
        ),
        Formula::ForallTerm(b, body) => {
            Formula::ForallTerm(b.clone(), Box::new(rename_pred_var(body, from, to)))
        }
        Formula::ExistsTerm(b, body) => {
            Formula::ExistsTerm(b.clone(), Box::new(rename_pred_var(body, from, to)))
        }
        Formula::ForallPred(x, n, body) if x != from => {
            Formula::ForallPred(x.clone(), *n, Box::new(rename_pred_var(body, from, to)))
        }
        Formula::ExistsPred(x, n, body) if x != from => {
            Formula::ExistsPred(x.clone(), *n, Box::new(rename_pred_var(body, from, to)))
        }
        Formula::ForallPred(..) | Formula::ExistsPred(..) => a.clone(),
        Formula::RecordTy(fs) => Formula::RecordTy(
            fs.iter().map(|(l, a)| (l.clone(), rename_pred_var(a, from, to))).collect(),
        ),
        Formula::VariantTy(cs) => Formula::VariantTy(
            cs.iter().map(|(c, a)| (c.clone(), rename_pred_var(a, from, to))).collect(),
        ),
        Formula::Member(t, a) => {
            Formula::Member(t.clone(), Box::new(rename_pred_var(a, from, to)))
        }
        Formula::Restrict(a, t, u) => Formula::Restrict(
            Box::new(rename_pred_var(a, from, to)),
            t.clone(),
            u.clone(),
        ),
    }
}

// ---------------------------------------------------------------------------
// Alpha-equivalence of formulas.

struct FormulaCanon {
    canon: Canon,
    pred_env: Vec<(Name, Name)>,
    next_pred: u64,
}

impl FormulaCanon {
    fn new() -> FormulaCanon {
        FormulaCanon { canon: Canon::new(), pred_env: Vec::new(), next_pred: 0 }
    }

    fn fresh_pred(&mut self) -> Name {
        let n = self.next_pred;
        self.next_pred += 1;
        Name::new(format!("!P{n}"))
    }

    fn formula(&mut self, a: &Formula) -> Formula {
        match a {
            Formula::PredApp(x, args) => {
                let x = Canon::lookup(&self.pred_env, x).unwrap_or_else(|| x.clone());
                Formula::PredApp(x, args.iter().map(|t| self.canon.term(t)).collect())
            }
            Formula::Arrow(l, r) => {
                Formula::Arrow(Box::new(self.formula(l)), Box::new(self.formula(r)))
            }
            Formula::ForallTerm(a, body) => {
                let c = self.canon.fresh_canonical();
                self.canon.term_env.push((a.clone(), c.clone()));
                let body = self.formula(body);
                self.canon.term_env.pop();
                Formula::ForallTerm(c, Box::new(body))
            }
            Formula::ExistsTerm(a, body) => {
                let c = self.canon.fresh_canonical();
                self.canon.term_env.push((a.clone(), c.clone()));
                let body = self.formula(body);
                self.canon.term_env.pop();
                Formula::ExistsTerm(c, Box::new(body))
            }
            Formula::ForallPred(x, n, body) => {
                let c = self.fresh_pred();
                self.pred_env.push((x.clone(), c.clone()));
                let body = self.formula(body);
                self.pred_env.pop();
                Formula::ForallPred(c, *n, Box::new(body))
            }
            Formula::ExistsPred(x, n, body) => {
                let c = self.fresh_pred();
                self.pred_env.push((x.clone(), c.clone()));
                let body = self.formula(body);
                self.pred_env.pop();
                Formula::ExistsPred(c, *n, Box::new(body))
            }
            Formula::RecordTy(fs) => Formula::RecordTy(
                fs.iter().map(|(l, a)| (l.clone(), self.formula(a))).collect(),
            ),
            Formula::VariantTy(cs) => Formula::VariantTy(
                cs.iter().map(|(c, a)| (c.clone(), self.formula(a))).collect(),
            ),
            Formula::Member(t, a) => Formula::Member(
                Box::new(self.canon.term(t)),
                Box::new(self.formula(a)),
            ),
            Formula::Restrict(a, t, u) => Formula::Restrict(
                Box::new(self.formula(a)),
                Box::new(self.canon.term(t)),
                Box::new(self.canon.term(u)),
            ),
            Formula::Named(n) => Formula::Named(n.clone()),
        }
    }
}

pub fn alpha_canonical_formula(a: &Formula) -> Formula {
    FormulaCanon::new().formula(a)
}

pub fn formula_alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha_canonical_formula(a) == alpha_canonical_formula(b)
}

// ---------------------------------------------------------------------------
// Typing contexts.

/// One hypothesis of a typing context. Contexts are ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContextEntry {
    /// `x : A`
    LambdaHyp(Name, Formula),
    /// `α : ¬A`
    StackHyp(Name, Formula),
    /// `a : Term`
    TermDecl(Name),
    /// `Xₙ : Predₙ`
    PredDecl(Name, usize),
    /// `t ≡ u`
    EquivHyp(Term, Term),
    /// `t ≢ u`
    InequivHyp(Term, Term),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    pub entries: Vec<ContextEntry>,
}

/// First-failure diagnostic of context validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityError {
    /// Index of the offending entry.
    pub entry: usize,
    pub message: String,
}

impl fmt::Display for ValidityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "context entry #{}: {}", self.entry, self.message)
    }
}

#[derive(Default)]
struct Doms {
    lambda: BTreeSet<Name>,
    mu: BTreeSet<Name>,
    term: BTreeSet<Name>,
    pred: BTreeMap<Name, usize>,
}

impl Doms {
    fn check_scoped(&self, fv: &FormulaVars, extra_lambda: Option<&Name>) -> Result<(), String> {
        for x in &fv.lambda {
            if !self.lambda.contains(x) && Some(x) != extra_lambda {
                return Err(format!("lambda-variable {x} is not in scope"));
            }
        }
        for a in &fv.mu {
            if !self.mu.contains(a) {
                return Err(format!("stack variable {a} is not in scope"));
            }
        }
        for a in &fv.term {
            if !self.term.contains(a) {
                return Err(format!("term variable {a} is not in scope"));
            }
        }
        for x in &fv.pred {
            if !self.pred.contains_key(x) {
                return Err(format!("predicate variable {x} is not in scope"));
            }
        }
        Ok(())
    }

    fn check_term_scoped(&self, t: &Term) -> Result<(), String> {
        let fv = free_vars_term(t);
        let as_formula_vars = FormulaVars {
            lambda: fv.lambda,
            mu: fv.mu,
            term: fv.term,
            pred: BTreeSet::new(),
        };
        self.check_scoped(&as_formula_vars, None)
    }
}

/// Check arity consistency of predicate applications against binders and
/// context declarations.
fn pred_arities_ok(a: &Formula, declared: &BTreeMap<Name, usize>) -> Result<(), String> {
    fn go(a: &Formula, env: &mut BTreeMap<Name, usize>) -> Result<(), String> {
        match a {
            Formula::PredApp(x, args) => {
                if let Some(&n) = env.get(x) {
                    if args.len() != n {
                        return Err(format!(
                            "predicate {x} declared with arity {n} but applied to {} arguments",
                            args.len()
                        ));
                    }
                }
                Ok(())
            }
            Formula::Arrow(l, r) => {
                go(l, env)?;
                go(r, env)
            }
            Formula::ForallTerm(_, b) | Formula::ExistsTerm(_, b) => go(b, env),
            Formula::ForallPred(x, n, b) | Formula::ExistsPred(x, n, b) => {
                let prev = env.insert(x.clone(), *n);
                let r = go(b, env);
                match prev {
                    Some(p) => {
                        env.insert(x.clone(), p);
                    }
                    None => {
                        env.remove(x);
                    }
                }
                r
            }
            Formula::RecordTy(fs) => fs.values().try_for_each(|a| go(a, env)),
            Formula::VariantTy(cs) => cs.values().try_for_each(|a| go(a, env)),
            Formula::Member(_, a) => go(a, env),
            Formula::Restrict(a, _, _) => go(a, env),
            Formula::Named(_) => Ok(()),
        }
    }
    let mut env = declared.clone();
    go(a, &mut env)
}

/// Validity of an ordered context: per-namespace freshness of every
/// declared name and scoping of every formula and equation. A hypothesis
/// `x : A` may mention `x` itself.
pub fn context_valid(ctx: &TypingContext) -> Result<(), ValidityError> {
    let mut doms = Doms::default();
    for (i, entry) in ctx.entries.iter().enumerate() {
        let fail = |message: String| ValidityError { entry: i, message };
        match entry {
            ContextEntry::LambdaHyp(x, a) => {
                if doms.lambda.contains(x) {
                    return Err(fail(format!("duplicate lambda-variable {x}")));
                }
                let fv = formula_free_vars(a);
                doms.check_scoped(&fv, Some(x)).map_err(fail)?;
                pred_arities_ok(a, &doms.pred).map_err(fail)?;
                doms.lambda.insert(x.clone());
            }
            ContextEntry::StackHyp(al, a) => {
                if doms.mu.contains(al) {
                    return Err(fail(format!("duplicate stack variable {al}")));
                }
                let fv = formula_free_vars(a);
                doms.check_scoped(&fv, None).map_err(fail)?;
                pred_arities_ok(a, &doms.pred).map_err(fail)?;
                doms.mu.insert(al.clone());
            }
            ContextEntry::TermDecl(a) => {
                if doms.term.contains(a) {
                    return Err(fail(format!("duplicate term variable {a}")));
                }
                doms.term.insert(a.clone());
            }
            ContextEntry::PredDecl(x, n) => {
                if doms.pred.contains_key(x) {
                    return Err(fail(format!("duplicate predicate variable {x}")));
                }
                doms.pred.insert(x.clone(), *n);
            }
            ContextEntry::EquivHyp(t, u) | ContextEntry::InequivHyp(t, u) => {
                doms.check_term_scoped(t).map_err(fail)?;
                doms.check_term_scoped(u).map_err(fail)?;
            }
        }
    }
    Ok(())
}

impl TypingContext {
    pub fn push(&mut self, entry: ContextEntry) {
        self.entries.push(entry);
    }

    pub fn extended(&self, entry: ContextEntry) -> TypingContext {
        let mut out = self.clone();
        out.entries.push(entry);
        out
    }

    pub fn lambda_hyp(&self, x: &Name) -> Option<&Formula> {
        self.entries.iter().rev().find_map(|e| match e {
            ContextEntry::LambdaHyp(y, a) if y == x => Some(a),
            _ => None,
        })
    }

    pub fn stack_hyp(&self, al: &Name) -> Option<&Formula> {
        self.entries.iter().rev().find_map(|e| match e {
            ContextEntry::StackHyp(b, a) if b == al => Some(a),
            _ => None,
        })
    }

    pub fn declares_term_var(&self, a: &Name) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, ContextEntry::TermDecl(b) if b == a))
    }

    /// All variables free in the context's formulas and equations, used
    /// for the freshness side-conditions of quantifier rules.
    pub fn free_vars(&self) -> FormulaVars {
        let mut fv = FormulaVars::default();
        for entry in &self.entries {
            match entry {
                ContextEntry::LambdaHyp(_, a) | ContextEntry::StackHyp(_, a) => {
                    fv = fv.union(formula_free_vars(a));
                }
                ContextEntry::TermDecl(_) | ContextEntry::PredDecl(..) => {}
                ContextEntry::EquivHyp(t, u) | ContextEntry::InequivHyp(t, u) => {
                    fv.absorb_term_vars(free_vars_term(t));
                    fv.absorb_term_vars(free_vars_term(u));
                }
            }
        }
        fv
    }
}

/// The restriction `ℰ_Γ` of a typing context to its equational content,
/// in order.
pub fn restrict_to_equational(ctx: &TypingContext) -> EquationalContext {
    let claims = ctx
        .entries
        .iter()
        .filter_map(|e| match e {
            ContextEntry::EquivHyp(t, u) => Some(Claim::equiv(t.clone(), u.clone())),
            ContextEntry::InequivHyp(t, u) => Some(Claim::inequiv(t.clone(), u.clone())),
            _ => None,
        })
        .collect();
    EquationalContext::new(claims)
}

/// Purity: no arrow anywhere, including under quantifiers, membership,
/// restriction and named-type unfoldings (each name visited once).
pub fn is_pure(a: &Formula, resolve: &dyn Fn(&Name) -> Option<Formula>) -> bool {
    fn go(
        a: &Formula,
        resolve: &dyn Fn(&Name) -> Option<Formula>,
        visited: &mut BTreeSet<Name>,
    ) -> bool {
        match a {
            Formula::Arrow(..) => false,
            Formula::PredApp(..) => true,
            Formula::ForallTerm(_, b)
            | Formula::ExistsTerm(_, b)
            | Formula::ForallPred(_, _, b)
            | Formula::ExistsPred(_, _, b) => go(b, resolve, visited),
            Formula::RecordTy(fs) => fs.values().all(|a| go(a, resolve, visited)),
            Formula::VariantTy(cs) => cs.values().all(|a| go(a, resolve, visited)),
            Formula::Member(_, b) => go(b, resolve, visited),
            Formula::Restrict(b, _, _) => go(b, resolve, visited),
            Formula::Named(n) => {
                if !visited.insert(n.clone()) {
                    return true;
                }
                match resolve(n) {
                    Some(unfolded) => go(&unfolded, resolve, visited),
                    None => true,
                }
            }
        }
    }
    go(a, resolve, &mut BTreeSet::new())
}

// ---------------------------------------------------------------------------
// Printing. The encodings of ⊥, ⊤, equations, inequations and the
// dependent product are printed back as their sugared forms.

fn formula_atom(a: &Formula) -> bool {
    matches!(
        a,
        Formula::PredApp(..)
            | Formula::RecordTy(_)
            | Formula::VariantTy(_)
            | Formula::Named(_)
    ) || a.is_bot()
        || a.is_top()
}

fn write_formula(f: &mut impl fmt::Write, a: &Formula) -> fmt::Result {
    if a.is_bot() {
        return write!(f, "⊥");
    }
    if a.is_top() {
        return write!(f, "⊤");
    }
    if let Some((t, u)) = a.as_equation() {
        return write!(f, "{t} ≡ {u}");
    }
    if let Formula::Arrow(l, r) = a {
        if r.is_bot() {
            if let Some((t, u)) = l.as_equation() {
                return write!(f, "{t} ≢ {u}");
            }
        }
    }
    if let Some((x, dom, cod)) = a.as_pi() {
        write!(f, "Π {x}:")?;
        write_atomic(f, dom)?;
        write!(f, " ")?;
        return write_formula(f, cod);
    }
    match a {
        Formula::PredApp(x, args) => {
            write!(f, "{x}")?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Arrow(l, r) => {
            write_atomic(f, l)?;
            write!(f, " ⇒ ")?;
            write_formula(f, r)
        }
        Formula::ForallTerm(x, b) => {
            write!(f, "∀{x} ")?;
            write_formula(f, b)
        }
        Formula::ExistsTerm(x, b) => {
            write!(f, "∃{x} ")?;
            write_formula(f, b)
        }
        Formula::ForallPred(x, n, b) => {
            write!(f, "∀{x}")?;
            if *n > 0 {
                write!(f, "/{n}")?;
            }
            write!(f, " ")?;
            write_formula(f, b)
        }
        Formula::ExistsPred(x, n, b) => {
            write!(f, "∃{x}")?;
            if *n > 0 {
                write!(f, "/{n}")?;
            }
            write!(f, " ")?;
            write_formula(f, b)
        }
        Formula::RecordTy(fs) => {
            write!(f, "{{")?;
            for (i, (l, a)) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{l} : ")?;
                write_formula(f, a)?;
            }
            write!(f, "}}")
        }
        Formula::VariantTy(cs) => {
            write!(f, "[")?;
            for (i, (c, a)) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                if formula_alpha_eq(a, &unit_singleton()) {
                    write!(f, "{c}[]")?;
                } else {
                    write!(f, "{c}[")?;
                    write_formula(f, a)?;
                    write!(f, "]")?;
                }
            }
            write!(f, "]")
        }
        Formula::Member(t, a) => {
            write!(f, "{t} ∈ ")?;
            write_atomic(f, a)
        }
        Formula::Restrict(a, t, u) => {
            write_atomic(f, a)?;
            write!(f, " ↾ {t} ≡ {u}")
        }
        Formula::Named(n) => write!(f, "{n}"),
    }
}

fn write_atomic(f: &mut impl fmt::Write, a: &Formula) -> fmt::Result {
    if formula_atom(a) {
        write_formula(f, a)
    } else {
        write!(f, "(")?;
        write_formula(f, a)?;
        write!(f, ")")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}

impl fmt::Display for ContextEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextEntry::LambdaHyp(x, a) => write!(f, "{x} : {a}"),
            ContextEntry::StackHyp(al, a) => write!(f, "{al} : ¬{a}"),
            ContextEntry::TermDecl(a) => write!(f, "{a} : Term"),
            ContextEntry::PredDecl(x, n) => write!(f, "{x} : Pred{n}"),
            ContextEntry::EquivHyp(t, u) => write!(f, "{t} ≡ {u}"),
            ContextEntry::InequivHyp(t, u) => write!(f, "{t} ≢ {u}"),
        }
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "•");
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Value;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn z() -> Term {
        Term::Val(Value::Ctor(n("Z"), Box::new(Value::unit())))
    }

    #[test]
    fn sugar_encodings() {
        assert_eq!(sugar_bot().to_string(), "⊥");
        assert_eq!(sugar_top().to_string(), "⊤");
        let eq = sugar_equation(Term::TermVar(n("t")), Term::TermVar(n("u")));
        assert!(matches!(&eq, Formula::Restrict(a, _, _) if a.is_top()));
        assert_eq!(eq.to_string(), "t ≡ u");
        let pi = sugar_pi(n("a"), Formula::Named(n("nat")), sugar_equation(z(), z()));
        assert!(pi.as_pi().is_some());
        assert_eq!(pi.to_string(), "Π a:nat Z[] ≡ Z[]");
    }

    #[test]
    fn pred_unfold_one_step() {
        // (∀a X(a))[X := (b, b ≡ Z[])] = ∀a (a ≡ Z[])
        let a = Formula::ForallTerm(
            n("a"),
            Box::new(Formula::PredApp(n("X"), vec![Term::TermVar(n("a"))])),
        );
        let def = PredicateDef {
            params: vec![n("b")],
            body: sugar_equation(Term::TermVar(n("b")), z()),
        };
        let out = formula_subst(&a, &FormulaBinding::Pred(n("X"), def)).unwrap();
        let expected = Formula::ForallTerm(
            n("a"),
            Box::new(sugar_equation(Term::TermVar(n("a")), z())),
        );
        assert!(formula_alpha_eq(&out, &expected), "{out} vs {expected}");
    }

    #[test]
    fn term_subst_in_member() {
        // (a ∈ A)[a := Z[]] = Z[] ∈ A
        let a = Formula::Member(Box::new(Term::TermVar(n("a"))), Box::new(Formula::Named(n("A"))));
        let out = formula_subst(&a, &FormulaBinding::Term(n("a"), z())).unwrap();
        assert_eq!(
            out,
            Formula::Member(Box::new(z()), Box::new(Formula::Named(n("A"))))
        );
    }

    #[test]
    fn binder_passthrough() {
        // (∀a A)[b := t] with a ≠ b descends under the binder
        let a = Formula::ForallTerm(
            n("a"),
            Box::new(Formula::Member(
                Box::new(Term::TermVar(n("b"))),
                Box::new(Formula::Named(n("A"))),
            )),
        );
        let out = formula_subst(&a, &FormulaBinding::Term(n("b"), z())).unwrap();
        let expected = Formula::ForallTerm(
            n("a"),
            Box::new(Formula::Member(Box::new(z()), Box::new(Formula::Named(n("A"))))),
        );
        assert!(formula_alpha_eq(&out, &expected));
    }

    #[test]
    fn arity_mismatch_is_hard_error() {
        let a = Formula::PredApp(n("X"), vec![z()]);
        let def = PredicateDef { params: vec![], body: sugar_top() };
        assert!(formula_subst(&a, &FormulaBinding::Pred(n("X"), def)).is_err());
    }

    #[test]
    fn context_validity() {
        // •, x:⊤, x:⊤ invalid (duplicate)
        let ctx = TypingContext {
            entries: vec![
                ContextEntry::LambdaHyp(n("x"), sugar_top()),
                ContextEntry::LambdaHyp(n("x"), sugar_top()),
            ],
        };
        assert!(context_valid(&ctx).is_err());

        // •, a:Term, (a ≡ Z[]) valid
        let ctx = TypingContext {
            entries: vec![
                ContextEntry::TermDecl(n("a")),
                ContextEntry::EquivHyp(Term::TermVar(n("a")), z()),
            ],
        };
        assert!(context_valid(&ctx).is_ok());

        // •, x : X1(a) with a undeclared invalid
        let ctx = TypingContext {
            entries: vec![
                ContextEntry::PredDecl(n("X1"), 1),
                ContextEntry::LambdaHyp(n("x"), Formula::PredApp(n("X1"), vec![Term::TermVar(n("a"))])),
            ],
        };
        let err = context_valid(&ctx).unwrap_err();
        assert!(err.message.contains("term variable a"), "{err}");
    }

    #[test]
    fn prefix_monotone() {
        let entries = vec![
            ContextEntry::TermDecl(n("a")),
            ContextEntry::LambdaHyp(n("x"), Formula::Named(n("nat"))),
            ContextEntry::EquivHyp(Term::var("x"), Term::TermVar(n("a"))),
        ];
        let full = TypingContext { entries: entries.clone() };
        assert!(context_valid(&full).is_ok());
        for k in 0..entries.len() {
            let prefix = TypingContext { entries: entries[..k].to_vec() };
            assert!(context_valid(&prefix).is_ok(), "prefix of length {k}");
        }
    }

    #[test]
    fn purity() {
        // variant with recursive named payload is pure
        let mut cs = BTreeMap::new();
        cs.insert(n("Z"), unit_singleton());
        cs.insert(n("S"), Formula::Named(n("nat")));
        let nat = Formula::VariantTy(cs);
        let table = nat.clone();
        let resolve = move |x: &Name| (x == &n("nat")).then(|| table.clone());
        assert!(is_pure(&nat, &resolve));
        assert!(!is_pure(
            &Formula::Arrow(Box::new(sugar_top()), Box::new(sugar_top())),
            &resolve
        ));
        assert!(is_pure(&sugar_equation(z(), z()), &resolve));
        // impurity hidden behind a named type is found
        let hidden = Formula::Named(n("f"));
        let arrow = Formula::Arrow(Box::new(sugar_top()), Box::new(sugar_top()));
        let resolve2 = move |x: &Name| (x == &n("f")).then(|| arrow.clone());
        assert!(!is_pure(&hidden, &resolve2));
    }

    #[test]
    fn equational_restriction_preserves_order() {
        let ctx = TypingContext {
            entries: vec![
                ContextEntry::LambdaHyp(n("x"), sugar_top()),
                ContextEntry::EquivHyp(Term::TermVar(n("t")), Term::TermVar(n("u"))),
                ContextEntry::TermDecl(n("a")),
                ContextEntry::InequivHyp(Term::TermVar(n("v")), Term::TermVar(n("w"))),
            ],
        };
        let e = restrict_to_equational(&ctx);
        assert_eq!(e.claims.len(), 2);
        assert_eq!(e.claims[0].polarity, crate::equivalence::Polarity::Equiv);
        assert_eq!(e.claims[1].polarity, crate::equivalence::Polarity::Inequiv);
        assert!(restrict_to_equational(&TypingContext::default()).is_empty());
    }

    #[test]
    fn formula_subst_commutes_with_free_vars() {
        // free vars after [a := t]: (FV \ {a}) ∪ FV(t) when a occurs
        let a = Formula::Member(
            Box::new(Term::TermVar(n("a"))),
            Box::new(Formula::PredApp(n("X"), vec![Term::TermVar(n("b"))])),
        );
        let t = Term::app(Term::var("f"), Term::TermVar(n("c")));
        let out = formula_subst(&a, &FormulaBinding::Term(n("a"), t)).unwrap();
        let fv = formula_free_vars(&out);
        assert_eq!(fv.term, BTreeSet::from([n("b"), n("c")]));
        assert_eq!(fv.lambda, BTreeSet::from([n("f")]));
    }
}
