//! Normalization by the three equational axiom schemata:
//!
//! * value-β:      `(λx t) v  →  t[x := v]` when `v` is a syntactic value
//! * projection:   `{…; l = v; …}.l  →  v`
//! * case:         `case C_k[v] {…; C_k[x] → t; …}  →  t[x := v]`
//!
//! Rewriting is leftmost-innermost and goes anywhere, including under
//! binders. Every contraction is an instance of an equivalence theorem,
//! so the result is equivalent to the input. Fuel exhaustion simply
//! returns the last form reached.

use crate::syntax::{subst_term, Binding, Process, Stack, Term, Value};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomKind {
    ValueBeta,
    Projection,
    CaseLiteral,
}

/// One recorded contraction, serializable for certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub position: String,
    pub axiom: AxiomKind,
    pub before: String,
    pub after: String,
}

struct Rewriter {
    fuel: u64,
    chain: Vec<RewriteStep>,
}

impl Rewriter {
    fn contract(&mut self, pos: &str, axiom: AxiomKind, before: &Term, after: &Term) {
        self.fuel = self.fuel.saturating_sub(1);
        self.chain.push(RewriteStep {
            position: pos.to_string(),
            axiom,
            before: before.to_string(),
            after: after.to_string(),
        });
    }

    fn value(&mut self, v: &Value, pos: &str) -> Value {
        match v {
            Value::Var(_) | Value::Scissors => v.clone(),
            Value::Lam(x, t) => {
                let t = self.term(t, &format!("{pos}.body"));
                Value::Lam(x.clone(), Box::new(t))
            }
            Value::Ctor(c, v) => {
                let v = self.value(v, &format!("{pos}.payload"));
                Value::Ctor(c.clone(), Box::new(v))
            }
            Value::Record(fs) => Value::Record(
                fs.iter()
                    .map(|(l, v)| (l.clone(), self.value(v, &format!("{pos}.{l}"))))
                    .collect(),
            ),
            Value::UnitProbe(v) => {
                let v = self.value(v, &format!("{pos}.probe"));
                Value::UnitProbe(Box::new(v))
            }
        }
    }

    /// A value the β axiom may substitute: the machine consumes it from a
    /// push, so the internal failing values are excluded.
    fn beta_arg(v: &Value) -> bool {
        !matches!(v, Value::Scissors | Value::UnitProbe(_))
    }

    // Innermost on applications (function and argument are both needed to
    // expose a β-redex), but case and projection contract as soon as the
    // scrutinee is literal, without visiting the non-selected branches: a
    // dead branch may contain a loop that would otherwise eat all fuel.
    fn term(&mut self, t: &Term, pos: &str) -> Term {
        if self.fuel == 0 {
            return t.clone();
        }
        match t {
            Term::Val(v) => Term::Val(self.value(v, pos)),
            Term::TermVar(_) => t.clone(),
            Term::App(f, a) => {
                let f = self.term(f, &format!("{pos}.fn"));
                let a = self.term(a, &format!("{pos}.arg"));
                let t = Term::app(f, a);
                if self.fuel == 0 {
                    return t;
                }
                if let Term::App(f, a) = &t {
                    if let (Term::Val(Value::Lam(x, body)), Term::Val(arg)) = (&**f, &**a) {
                        if Self::beta_arg(arg) {
                            let reduced =
                                subst_term(body, Binding::LambdaVar(x.clone(), arg.clone()));
                            self.contract(pos, AxiomKind::ValueBeta, &t, &reduced);
                            return self.term(&reduced, pos);
                        }
                    }
                }
                t
            }
            Term::Mu(a, body) => {
                Term::Mu(a.clone(), Box::new(self.term(body, &format!("{pos}.body"))))
            }
            Term::Proc(p) => Term::Proc(Box::new(Process::new(
                self.term(&p.term, &format!("{pos}.head")),
                self.stack(&p.stack, &format!("{pos}.stack")),
            ))),
            Term::Proj(v, l) => {
                let v = self.value(v, &format!("{pos}.scrutinee"));
                let t = Term::Proj(Box::new(v), l.clone());
                if self.fuel == 0 {
                    return t;
                }
                if let Term::Proj(v, l) = &t {
                    if let Value::Record(fs) = &**v {
                        if let Some(field) = fs.get(l) {
                            let reduced = Term::Val(field.clone());
                            self.contract(pos, AxiomKind::Projection, &t, &reduced);
                            return self.term(&reduced, pos);
                        }
                    }
                }
                t
            }
            Term::Case(v, bs) => {
                let scrut = self.value(v, &format!("{pos}.scrutinee"));
                if self.fuel > 0 {
                    if let Value::Ctor(c, payload) = &scrut {
                        if let Some((x, body)) = bs.get(c) {
                            let redex = Term::Case(Box::new(scrut.clone()), bs.clone());
                            let reduced = subst_term(
                                body,
                                Binding::LambdaVar(x.clone(), (**payload).clone()),
                            );
                            self.contract(pos, AxiomKind::CaseLiteral, &redex, &reduced);
                            return self.term(&reduced, pos);
                        }
                    }
                }
                Term::Case(
                    Box::new(scrut),
                    bs.iter()
                        .map(|(c, (x, body))| {
                            let body = self.term(body, &format!("{pos}.branch({c})"));
                            (c.clone(), (x.clone(), body))
                        })
                        .collect(),
                )
            }
            Term::Delta(v, w) => Term::Delta(
                Box::new(self.value(v, &format!("{pos}.left"))),
                Box::new(self.value(w, &format!("{pos}.right"))),
            ),
        }
    }

    fn stack(&mut self, s: &Stack, pos: &str) -> Stack {
        match s {
            Stack::Var(_) => s.clone(),
            Stack::Push(v, rest) => Stack::Push(
                Box::new(self.value(v, &format!("{pos}.push"))),
                Box::new(self.stack(rest, &format!("{pos}.rest"))),
            ),
            Stack::Frame(t, rest) => Stack::Frame(
                Box::new(self.term(t, &format!("{pos}.frame"))),
                Box::new(self.stack(rest, &format!("{pos}.rest"))),
            ),
        }
    }
}

/// Normalize a term, recording each contraction.
pub fn normalize_with_chain(t: &Term, fuel: u64) -> (Term, Vec<RewriteStep>) {
    let mut rw = Rewriter { fuel, chain: Vec::new() };
    let out = rw.term(t, "");
    (out, rw.chain)
}

pub fn normalize(t: &Term, fuel: u64) -> Term {
    normalize_with_chain(t, fuel).0
}
