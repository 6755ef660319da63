//! Input tree of the checker: the desugared surface language. It mirrors
//! the core term grammar, keeps the checker-directed annotations
//! (quantifier witnesses, rewrite hints) that elaboration consumes, and
//! carries `✂` as a hole to be discharged equationally.

use crate::syntax::{Name, Term, Value};
use crate::types::PredicateDef;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub enum Ast {
    /// A lambda-variable reference (definitions included).
    Var(Name),
    Lam(Name, Box<Ast>),
    App(Box<Ast>, Box<Ast>),
    Mu(Name, Box<Ast>),
    /// `e ∗ α` — restart the continuation bound to `α`.
    Restart(Box<Ast>, Name),
    Ctor(Name, Box<Ast>),
    Record(BTreeMap<Name, Ast>),
    Proj(Box<Ast>, Name),
    Case(Box<Ast>, BTreeMap<Name, (Name, Ast)>),
    /// `✂`
    Scissors,
    /// `e{u}` — term witness for a quantifier rule.
    WitnessTerm(Box<Ast>, Term),
    /// `e{X := (params, B)}` — predicate witness.
    WitnessPred(Box<Ast>, PredicateDef),
    /// `rewrite t ≡ u in e`.
    RewriteHint(Box<Ast>, Term, Term),
    /// An already-core term (used by internal drivers and tests).
    Core(Term),
}

impl Ast {
    pub fn var(s: &str) -> Ast {
        Ast::Var(Name::new(s))
    }

    pub fn lam(x: &str, body: Ast) -> Ast {
        Ast::Lam(Name::new(x), Box::new(body))
    }

    pub fn app(f: Ast, a: Ast) -> Ast {
        Ast::App(Box::new(f), Box::new(a))
    }

    /// Is the erased form a syntactic value?
    pub fn is_value_form(&self) -> bool {
        matches!(
            self,
            Ast::Var(_) | Ast::Lam(..) | Ast::Scissors
        ) || match self {
            Ast::Ctor(_, p) => p.is_value_form(),
            Ast::Record(fs) => fs.values().all(Ast::is_value_form),
            Ast::Core(Term::Val(_)) => true,
            _ => false,
        }
    }

    /// Erase hints and produce a core term. Non-value scrutinees and
    /// payloads are wrapped in an application of a projection/constructor
    /// function, keeping the value-position invariant of the machine.
    pub fn erase(&self) -> Term {
        match self {
            Ast::Var(x) => Term::Val(Value::Var(x.clone())),
            Ast::Lam(x, b) => Term::Val(Value::Lam(x.clone(), Box::new(b.erase()))),
            Ast::App(f, a) => Term::app(f.erase(), a.erase()),
            Ast::Mu(a, b) => Term::Mu(a.clone(), Box::new(b.erase())),
            Ast::Restart(e, a) => Term::Proc(Box::new(crate::syntax::Process::new(
                e.erase(),
                crate::syntax::Stack::Var(a.clone()),
            ))),
            Ast::Ctor(c, p) => match p.erase_value() {
                Some(v) => Term::Val(Value::Ctor(c.clone(), Box::new(v))),
                None => {
                    // C[t] := (λx C[x]) t
                    let x = crate::syntax::fresh(&Name::new("x"));
                    Term::app(
                        Term::Val(Value::Lam(
                            x.clone(),
                            Box::new(Term::Val(Value::Ctor(
                                c.clone(),
                                Box::new(Value::Var(x)),
                            ))),
                        )),
                        p.erase(),
                    )
                }
            },
            Ast::Record(fs) => {
                if fs.values().all(Ast::is_value_form) {
                    let fields = fs
                        .iter()
                        .map(|(l, a)| (l.clone(), a.erase_value().expect("value field")))
                        .collect();
                    Term::Val(Value::Record(fields))
                } else {
                    // {l = t; …} := (λx₁ (λx₂ {…}) t₂) t₁ — nested redexes,
                    // fields evaluated in label order
                    let mut bindings = Vec::new();
                    let mut fields = BTreeMap::new();
                    for (l, a) in fs {
                        if a.is_value_form() {
                            fields.insert(l.clone(), a.erase_value().expect("value field"));
                        } else {
                            let x = crate::syntax::fresh(&Name::new("x"));
                            fields.insert(l.clone(), Value::Var(x.clone()));
                            bindings.push((x, a.erase()));
                        }
                    }
                    let mut out = Term::Val(Value::Record(fields));
                    for (x, a) in bindings.into_iter().rev() {
                        out = Term::app(Term::Val(Value::Lam(x, Box::new(out))), a);
                    }
                    out
                }
            }
            Ast::Proj(v, l) => match v.erase_value() {
                Some(val) => Term::Proj(Box::new(val), l.clone()),
                None => {
                    // t.l := (λx x.l) t
                    let x = crate::syntax::fresh(&Name::new("x"));
                    Term::app(
                        Term::Val(Value::Lam(
                            x.clone(),
                            Box::new(Term::Proj(Box::new(Value::Var(x)), l.clone())),
                        )),
                        v.erase(),
                    )
                }
            },
            Ast::Case(v, bs) => {
                let branches: BTreeMap<Name, (Name, Term)> = bs
                    .iter()
                    .map(|(c, (x, b))| (c.clone(), (x.clone(), b.erase())))
                    .collect();
                match v.erase_value() {
                    Some(val) => Term::Case(Box::new(val), branches),
                    None => {
                        let x = crate::syntax::fresh(&Name::new("x"));
                        Term::app(
                            Term::Val(Value::Lam(
                                x.clone(),
                                Box::new(Term::Case(Box::new(Value::Var(x)), branches)),
                            )),
                            v.erase(),
                        )
                    }
                }
            }
            Ast::Scissors => Term::Val(Value::Scissors),
            Ast::WitnessTerm(e, _) | Ast::WitnessPred(e, _) | Ast::RewriteHint(e, _, _) => {
                e.erase()
            }
            Ast::Core(t) => t.clone(),
        }
    }

    pub fn erase_value(&self) -> Option<Value> {
        match self.erase() {
            Term::Val(v) => Some(v),
            _ => None,
        }
    }
}
