//! Abstract syntax for the four sorts of the calculus: values, terms,
//! stacks and processes. Three disjoint variable namespaces are used:
//! lambda-variables (bound by abstractions and case branches),
//! mu-variables (stack variables, bound by `mu`) and term variables
//! (never bound inside terms, only in formulas).
//!
//! All syntax is immutable after construction. The only mutable piece of
//! state is the global fresh-name supply, which hands out names that are
//! unused anywhere in the running program.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// An identifier. One shared representation for all namespaces; which
/// namespace a name belongs to is determined by its position in the AST.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Self {
        Name(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Move the fresh-name counter past `n`. The lexer calls this for every
/// identifier carrying a `'N` suffix it reads back, so re-parsed printed
/// terms can never collide with names the supply hands out later.
pub fn reserve_fresh_above(n: u64) {
    FRESH_COUNTER.fetch_max(n.saturating_add(1), Ordering::Relaxed);
}

/// Draw a globally unused name from the fresh-name supply. The result is
/// `base'N` where `N` is taken from a global counter.
pub fn fresh(base: &Name) -> Name {
    let stem = match base.as_str().find('\'') {
        Some(i) => &base.as_str()[..i],
        None => base.as_str(),
    };
    let n = FRESH_COUNTER.fetch_add(1, Ordering::Relaxed);
    Name::new(format!("{stem}'{n}"))
}

/// Values: the things the machine is allowed to push on a stack.
/// `Scissors` and `UnitProbe` are internal/erroneous values: the former
/// makes the machine fail outright, the latter exists only so that the
/// empty record can be told apart from functions. Neither is produced by
/// the surface parser in a position the type system has not sanctioned.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    /// A lambda-variable used as a value.
    Var(Name),
    /// `λx t`
    Lam(Name, Box<Term>),
    /// `C[v]`
    Ctor(Name, Box<Value>),
    /// `{l₁ = v₁; …}` — labels pairwise distinct, unordered.
    Record(BTreeMap<Name, Value>),
    /// `✂` — the machine fails on it.
    Scissors,
    /// `unit_v` — steps only when `v` is the empty record.
    UnitProbe(Box<Value>),
}

/// Terms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Val(Value),
    /// A term variable `a` (an "individual" of the logic).
    TermVar(Name),
    /// `t u`
    App(Box<Term>, Box<Term>),
    /// `μα t`
    Mu(Name, Box<Term>),
    /// A process used as a term: `t ∗ π`.
    Proc(Box<Process>),
    /// `v.l` — scrutinee restricted to values.
    Proj(Box<Value>, Name),
    /// `case v {Cᵢ[xᵢ] → tᵢ}` — scrutinee restricted to values.
    Case(Box<Value>, BTreeMap<Name, (Name, Term)>),
    /// `δ(v, w)` — internal instruction, steps only on known-inequivalent
    /// values. Rejected by the surface parser.
    Delta(Box<Value>, Box<Value>),
}

/// Stacks. Every stack bottoms out in exactly one stack variable, so a
/// stack (and hence a process) is never closed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Stack {
    Var(Name),
    /// `v.π`
    Push(Box<Value>, Box<Stack>),
    /// `[t]π`
    Frame(Box<Term>, Box<Stack>),
}

/// A machine state: `t ∗ π`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Process {
    pub term: Term,
    pub stack: Stack,
}

impl Value {
    pub fn unit() -> Value {
        Value::Record(BTreeMap::new())
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Value::Record(fs) if fs.is_empty())
    }

    /// Number of AST nodes (the `Term::Val` wrapper is transparent).
    pub fn size(&self) -> usize {
        match self {
            Value::Var(_) | Value::Scissors => 1,
            Value::Lam(_, t) => 1 + t.size(),
            Value::Ctor(_, v) | Value::UnitProbe(v) => 1 + v.size(),
            Value::Record(fs) => 1 + fs.values().map(Value::size).sum::<usize>(),
        }
    }
}

impl Term {
    pub fn lam(x: impl Into<Name>, body: Term) -> Term {
        Term::Val(Value::Lam(x.into(), Box::new(body)))
    }

    pub fn var(x: impl Into<Name>) -> Term {
        Term::Val(Value::Var(x.into()))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Term::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Val(_))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Val(v) => v.size(),
            Term::TermVar(_) => 1,
            Term::App(t, u) => 1 + t.size() + u.size(),
            Term::Mu(_, t) => 1 + t.size(),
            Term::Proc(p) => 1 + p.size(),
            Term::Proj(v, _) => 1 + v.size(),
            Term::Case(v, bs) => {
                1 + v.size() + bs.values().map(|(_, t)| t.size()).sum::<usize>()
            }
            Term::Delta(v, w) => 1 + v.size() + w.size(),
        }
    }
}

impl Stack {
    pub fn size(&self) -> usize {
        match self {
            Stack::Var(_) => 1,
            Stack::Push(v, s) => 1 + v.size() + s.size(),
            Stack::Frame(t, s) => 1 + t.size() + s.size(),
        }
    }
}

impl Process {
    pub fn new(term: Term, stack: Stack) -> Process {
        Process { term, stack }
    }

    pub fn size(&self) -> usize {
        self.term.size() + self.stack.size()
    }
}

/// The free variables of a syntactic object, split by namespace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarSets {
    pub lambda: BTreeSet<Name>,
    pub mu: BTreeSet<Name>,
    pub term: BTreeSet<Name>,
}

impl VarSets {
    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty() && self.mu.is_empty() && self.term.is_empty()
    }

    fn union(mut self, other: VarSets) -> VarSets {
        self.lambda.extend(other.lambda);
        self.mu.extend(other.mu);
        self.term.extend(other.term);
        self
    }
}

pub fn free_vars_value(v: &Value) -> VarSets {
    match v {
        Value::Var(x) => VarSets {
            lambda: BTreeSet::from([x.clone()]),
            ..Default::default()
        },
        Value::Lam(x, t) => {
            let mut fv = free_vars_term(t);
            fv.lambda.remove(x);
            fv
        }
        Value::Ctor(_, v) | Value::UnitProbe(v) => free_vars_value(v),
        Value::Record(fs) => fs
            .values()
            .fold(VarSets::default(), |acc, v| acc.union(free_vars_value(v))),
        Value::Scissors => VarSets::default(),
    }
}

pub fn free_vars_term(t: &Term) -> VarSets {
    match t {
        Term::Val(v) => free_vars_value(v),
        Term::TermVar(a) => VarSets {
            term: BTreeSet::from([a.clone()]),
            ..Default::default()
        },
        Term::App(t, u) => free_vars_term(t).union(free_vars_term(u)),
        Term::Mu(a, t) => {
            let mut fv = free_vars_term(t);
            fv.mu.remove(a);
            fv
        }
        Term::Proc(p) => free_vars_process(p),
        Term::Proj(v, _) => free_vars_value(v),
        Term::Case(v, bs) => bs.values().fold(free_vars_value(v), |acc, (x, t)| {
            let mut fv = free_vars_term(t);
            fv.lambda.remove(x);
            acc.union(fv)
        }),
        Term::Delta(v, w) => free_vars_value(v).union(free_vars_value(w)),
    }
}

pub fn free_vars_stack(s: &Stack) -> VarSets {
    match s {
        Stack::Var(a) => VarSets {
            mu: BTreeSet::from([a.clone()]),
            ..Default::default()
        },
        Stack::Push(v, s) => free_vars_value(v).union(free_vars_stack(s)),
        Stack::Frame(t, s) => free_vars_term(t).union(free_vars_stack(s)),
    }
}

pub fn free_vars_process(p: &Process) -> VarSets {
    free_vars_term(&p.term).union(free_vars_stack(&p.stack))
}

/// One substitution binding, well-sorted by construction.
#[derive(Clone, Debug)]
pub enum Binding {
    /// `[x := v]`
    LambdaVar(Name, Value),
    /// `[α := π]`
    MuVar(Name, Stack),
    /// `[a := t]`
    TermVar(Name, Term),
}

impl Binding {
    fn replacement_free_vars(&self) -> VarSets {
        match self {
            Binding::LambdaVar(_, v) => free_vars_value(v),
            Binding::MuVar(_, s) => free_vars_stack(s),
            Binding::TermVar(_, t) => free_vars_term(t),
        }
    }
}

/// Capture-avoiding substitution. Binders that would capture a free
/// variable of the replacement are renamed with the fresh-name supply, so
/// the result is only determined up to alpha-equivalence.
pub struct Subst {
    binding: Binding,
    fv: VarSets,
}

impl Subst {
    pub fn new(binding: Binding) -> Subst {
        let fv = binding.replacement_free_vars();
        Subst { binding, fv }
    }

    fn shadows_lambda(&self, x: &Name) -> bool {
        matches!(&self.binding, Binding::LambdaVar(y, _) if y == x)
    }

    fn shadows_mu(&self, a: &Name) -> bool {
        matches!(&self.binding, Binding::MuVar(b, _) if b == a)
    }

    /// Rename a lambda binder when it would capture, returning the binder
    /// to use and the renamed body.
    fn enter_lambda(&self, x: &Name, body: &Term) -> (Name, Term) {
        if self.fv.lambda.contains(x) {
            let x2 = fresh(x);
            let renamed = Subst::new(Binding::LambdaVar(x.clone(), Value::Var(x2.clone())))
                .apply_term(body);
            (x2, renamed)
        } else {
            (x.clone(), body.clone())
        }
    }

    fn enter_mu(&self, a: &Name, body: &Term) -> (Name, Term) {
        if self.fv.mu.contains(a) {
            let a2 = fresh(a);
            let renamed =
                Subst::new(Binding::MuVar(a.clone(), Stack::Var(a2.clone()))).apply_term(body);
            (a2, renamed)
        } else {
            (a.clone(), body.clone())
        }
    }

    pub fn apply_value(&self, v: &Value) -> Value {
        match v {
            Value::Var(x) => match &self.binding {
                Binding::LambdaVar(y, w) if y == x => w.clone(),
                _ => v.clone(),
            },
            Value::Lam(x, body) => {
                if self.shadows_lambda(x) {
                    return v.clone();
                }
                let (x2, body) = self.enter_lambda(x, body);
                Value::Lam(x2, Box::new(self.apply_term(&body)))
            }
            Value::Ctor(c, v) => Value::Ctor(c.clone(), Box::new(self.apply_value(v))),
            Value::Record(fs) => Value::Record(
                fs.iter()
                    .map(|(l, v)| (l.clone(), self.apply_value(v)))
                    .collect(),
            ),
            Value::Scissors => Value::Scissors,
            Value::UnitProbe(v) => Value::UnitProbe(Box::new(self.apply_value(v))),
        }
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Val(v) => Term::Val(self.apply_value(v)),
            Term::TermVar(a) => match &self.binding {
                Binding::TermVar(b, u) if b == a => u.clone(),
                _ => t.clone(),
            },
            Term::App(t, u) => Term::app(self.apply_term(t), self.apply_term(u)),
            Term::Mu(a, body) => {
                if self.shadows_mu(a) {
                    return t.clone();
                }
                let (a2, body) = self.enter_mu(a, body);
                Term::Mu(a2, Box::new(self.apply_term(&body)))
            }
            Term::Proc(p) => Term::Proc(Box::new(self.apply_process(p))),
            Term::Proj(v, l) => Term::Proj(Box::new(self.apply_value(v)), l.clone()),
            Term::Case(v, bs) => {
                let scrut = self.apply_value(v);
                let branches = bs
                    .iter()
                    .map(|(c, (x, body))| {
                        if self.shadows_lambda(x) {
                            return (c.clone(), (x.clone(), body.clone()));
                        }
                        let (x2, body) = self.enter_lambda(x, body);
                        (c.clone(), (x2, self.apply_term(&body)))
                    })
                    .collect();
                Term::Case(Box::new(scrut), branches)
            }
            Term::Delta(v, w) => Term::Delta(
                Box::new(self.apply_value(v)),
                Box::new(self.apply_value(w)),
            ),
        }
    }

    pub fn apply_stack(&self, s: &Stack) -> Stack {
        match s {
            Stack::Var(a) => match &self.binding {
                Binding::MuVar(b, pi) if b == a => pi.clone(),
                _ => s.clone(),
            },
            Stack::Push(v, s) => {
                Stack::Push(Box::new(self.apply_value(v)), Box::new(self.apply_stack(s)))
            }
            Stack::Frame(t, s) => {
                Stack::Frame(Box::new(self.apply_term(t)), Box::new(self.apply_stack(s)))
            }
        }
    }

    pub fn apply_process(&self, p: &Process) -> Process {
        Process::new(self.apply_term(&p.term), self.apply_stack(&p.stack))
    }
}

pub fn subst_term(t: &Term, binding: Binding) -> Term {
    Subst::new(binding).apply_term(t)
}

pub fn subst_value(v: &Value, binding: Binding) -> Value {
    Subst::new(binding).apply_value(v)
}

pub fn subst_stack(s: &Stack, binding: Binding) -> Stack {
    Subst::new(binding).apply_stack(s)
}

pub fn subst_process(p: &Process, binding: Binding) -> Process {
    Subst::new(binding).apply_process(p)
}

// ---------------------------------------------------------------------------
// Alpha-equivalence via canonical renaming of binders.

pub(crate) struct Canon {
    // stacks of (original, canonical) per namespace
    lambda: Vec<(Name, Name)>,
    mu: Vec<(Name, Name)>,
    // term variables are never bound in terms, but formulas bind them;
    // the formula canonicalizer pushes renamings here
    pub(crate) term_env: Vec<(Name, Name)>,
    next: u64,
}

impl Canon {
    pub(crate) fn new() -> Canon {
        Canon { lambda: Vec::new(), mu: Vec::new(), term_env: Vec::new(), next: 0 }
    }

    pub(crate) fn fresh_canonical(&mut self) -> Name {
        let n = self.next;
        self.next += 1;
        Name::new(format!("!{n}"))
    }

    pub(crate) fn lookup(stack: &[(Name, Name)], x: &Name) -> Option<Name> {
        stack.iter().rev().find(|(o, _)| o == x).map(|(_, c)| c.clone())
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var(x) => {
                Value::Var(Canon::lookup(&self.lambda, x).unwrap_or_else(|| x.clone()))
            }
            Value::Lam(x, t) => {
                let c = self.fresh_canonical();
                self.lambda.push((x.clone(), c.clone()));
                let t = self.term(t);
                self.lambda.pop();
                Value::Lam(c, Box::new(t))
            }
            Value::Ctor(c, v) => Value::Ctor(c.clone(), Box::new(self.value(v))),
            Value::Record(fs) => Value::Record(
                fs.iter().map(|(l, v)| (l.clone(), self.value(v))).collect(),
            ),
            Value::Scissors => Value::Scissors,
            Value::UnitProbe(v) => Value::UnitProbe(Box::new(self.value(v))),
        }
    }

    pub(crate) fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Val(v) => Term::Val(self.value(v)),
            Term::TermVar(a) => Term::TermVar(
                Canon::lookup(&self.term_env, a).unwrap_or_else(|| a.clone()),
            ),
            Term::App(t, u) => Term::app(self.term(t), self.term(u)),
            Term::Mu(a, t) => {
                let c = self.fresh_canonical();
                self.mu.push((a.clone(), c.clone()));
                let t = self.term(t);
                self.mu.pop();
                Term::Mu(c, Box::new(t))
            }
            Term::Proc(p) => Term::Proc(Box::new(self.process(p))),
            Term::Proj(v, l) => Term::Proj(Box::new(self.value(v)), l.clone()),
            Term::Case(v, bs) => {
                let scrut = self.value(v);
                let branches = bs
                    .iter()
                    .map(|(ctor, (x, body))| {
                        let c = self.fresh_canonical();
                        self.lambda.push((x.clone(), c.clone()));
                        let body = self.term(body);
                        self.lambda.pop();
                        (ctor.clone(), (c, body))
                    })
                    .collect();
                Term::Case(Box::new(scrut), branches)
            }
            Term::Delta(v, w) => {
                Term::Delta(Box::new(self.value(v)), Box::new(self.value(w)))
            }
        }
    }

    fn stack(&mut self, s: &Stack) -> Stack {
        match s {
            Stack::Var(a) => Stack::Var(Canon::lookup(&self.mu, a).unwrap_or_else(|| a.clone())),
            Stack::Push(v, s) => Stack::Push(Box::new(self.value(v)), Box::new(self.stack(s))),
            Stack::Frame(t, s) => Stack::Frame(Box::new(self.term(t)), Box::new(self.stack(s))),
        }
    }

    fn process(&mut self, p: &Process) -> Process {
        Process::new(self.term(&p.term), self.stack(&p.stack))
    }
}

/// Canonical representative of a term's alpha-class: every binder is
/// renamed to `!k` in traversal order. Two terms are alpha-equivalent iff
/// their canonical forms are structurally equal.
pub fn alpha_canonical_term(t: &Term) -> Term {
    Canon::new().term(t)
}

pub fn alpha_canonical_value(v: &Value) -> Value {
    Canon::new().value(v)
}

pub fn alpha_canonical_process(p: &Process) -> Process {
    Canon::new().process(p)
}

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    alpha_canonical_term(a) == alpha_canonical_term(b)
}

pub fn alpha_eq_value(a: &Value, b: &Value) -> bool {
    alpha_canonical_value(a) == alpha_canonical_value(b)
}

pub fn alpha_eq_process(a: &Process, b: &Process) -> bool {
    alpha_canonical_process(a) == alpha_canonical_process(b)
}
