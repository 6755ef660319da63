//! Shared test machinery: a seeded random generator for terms of the
//! calculus and an exhaustive enumerator of small processes over a fixed
//! two-constructor, two-label alphabet.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use svr_core::syntax::{Name, Process, Stack, Term, Value};

pub fn n(s: &str) -> Name {
    Name::new(s)
}

// ---------------------------------------------------------------------------
// Seeded random generation.

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub ctors: Vec<Name>,
    pub labels: Vec<Name>,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ctors: vec![n("C"), n("D")],
            labels: vec![n("l1"), n("l2")],
        }
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    /// A closed value of bounded depth (proper values only).
    pub fn closed_value(&mut self, depth: usize) -> Value {
        if depth == 0 {
            return if self.rng.gen_bool(0.5) {
                Value::unit()
            } else {
                Value::Lam(n("x"), Box::new(Term::var("x")))
            };
        }
        match self.rng.gen_range(0..4u8) {
            0 => Value::unit(),
            1 => {
                let c = self.pick(&self.ctors.clone()).clone();
                Value::Ctor(c, Box::new(self.closed_value(depth - 1)))
            }
            2 => {
                let mut fs = BTreeMap::new();
                let k = self.rng.gen_range(0..=2);
                let labels = self.labels.clone();
                for l in labels.iter().take(k) {
                    fs.insert(l.clone(), self.closed_value(depth - 1));
                }
                Value::Record(fs)
            }
            _ => {
                let body = self.closed_term_with(&[n("x")], depth - 1);
                Value::Lam(n("x"), Box::new(body))
            }
        }
    }

    /// A closed term (free lambda-variables drawn from `bound`).
    pub fn closed_term_with(&mut self, bound: &[Name], depth: usize) -> Term {
        if depth == 0 {
            return if !bound.is_empty() && self.rng.gen_bool(0.5) {
                Term::Val(Value::Var(self.pick(bound).clone()))
            } else {
                Term::Val(self.closed_value(0))
            };
        }
        match self.rng.gen_range(0..6u8) {
            0 => Term::Val(self.closed_value(depth)),
            1 => Term::app(
                self.closed_term_with(bound, depth - 1),
                self.closed_term_with(bound, depth - 1),
            ),
            2 => {
                let mut inner: Vec<Name> = bound.to_vec();
                inner.push(n("y"));
                Term::lam("y", self.closed_term_with(&inner, depth - 1))
            }
            3 => {
                let scrut = self.closed_value(depth - 1);
                let mut branches = BTreeMap::new();
                for c in self.ctors.clone() {
                    let mut inner: Vec<Name> = bound.to_vec();
                    inner.push(n("b"));
                    branches.insert(c, (n("b"), self.closed_term_with(&inner, depth - 1)));
                }
                Term::Case(Box::new(scrut), branches)
            }
            4 => {
                let l = self.pick(&self.labels.clone()).clone();
                Term::Proj(Box::new(self.closed_value(depth - 1)), l)
            }
            _ => Term::Val(self.closed_value(depth)),
        }
    }

    pub fn closed_term(&mut self, depth: usize) -> Term {
        self.closed_term_with(&[], depth)
    }

    /// An arbitrary (possibly open, δ-free) process.
    pub fn process(&mut self, depth: usize) -> Process {
        Process::new(self.open_term(depth), self.open_stack(depth))
    }

    pub fn open_term(&mut self, depth: usize) -> Term {
        if depth == 0 {
            return match self.rng.gen_range(0..4u8) {
                0 => Term::var("x"),
                1 => Term::TermVar(n("a")),
                2 => Term::Val(Value::unit()),
                _ => Term::lam("y", Term::var("y")),
            };
        }
        match self.rng.gen_range(0..8u8) {
            0 => Term::app(self.open_term(depth - 1), self.open_term(depth - 1)),
            1 => Term::Mu(n("k"), Box::new(self.open_term(depth - 1))),
            2 => Term::Proc(Box::new(Process::new(
                self.open_term(depth - 1),
                self.open_stack(depth - 1),
            ))),
            3 => {
                let l = self.pick(&self.labels.clone()).clone();
                Term::Proj(Box::new(self.open_value(depth - 1)), l)
            }
            4 => {
                let scrut = self.open_value(depth - 1);
                let mut branches = BTreeMap::new();
                for c in self.ctors.clone() {
                    branches.insert(c, (n("b"), self.open_term(depth - 1)));
                }
                Term::Case(Box::new(scrut), branches)
            }
            5 => Term::lam("y", self.open_term(depth - 1)),
            _ => Term::Val(self.open_value(depth)),
        }
    }

    pub fn open_value(&mut self, depth: usize) -> Value {
        if depth == 0 {
            return match self.rng.gen_range(0..3u8) {
                0 => Value::Var(n("x")),
                1 => Value::unit(),
                _ => Value::Lam(n("y"), Box::new(Term::var("y"))),
            };
        }
        match self.rng.gen_range(0..4u8) {
            0 => {
                let c = self.pick(&self.ctors.clone()).clone();
                Value::Ctor(c, Box::new(self.open_value(depth - 1)))
            }
            1 => {
                let mut fs = BTreeMap::new();
                fs.insert(self.pick(&self.labels.clone()).clone(), self.open_value(depth - 1));
                Value::Record(fs)
            }
            2 => Value::Lam(n("y"), Box::new(self.open_term(depth - 1))),
            _ => self.open_value(0),
        }
    }

    pub fn open_stack(&mut self, depth: usize) -> Stack {
        if depth == 0 {
            return Stack::Var(n("k0"));
        }
        match self.rng.gen_range(0..3u8) {
            0 => Stack::Var(n("k0")),
            1 => Stack::Push(
                Box::new(self.open_value(depth - 1)),
                Box::new(self.open_stack(depth - 1)),
            ),
            _ => Stack::Frame(
                Box::new(self.open_term(depth - 1)),
                Box::new(self.open_stack(depth - 1)),
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Independent oracles for machine conformance: rule applicability and
// blocked-state classification restated from the definitions, without
// calling into the machine.

use svr_core::machine::BlockedClass;

pub fn applicable_rules(p: &Process) -> Vec<&'static str> {
    let mut rules = Vec::new();
    match &p.term {
        Term::App(..) => rules.push("app"),
        Term::Mu(..) => rules.push("mu"),
        Term::Proc(_) => rules.push("restart"),
        Term::Proj(v, l) => {
            if let Value::Record(fs) = &**v {
                if fs.contains_key(l) {
                    rules.push("proj");
                }
            }
        }
        Term::Case(v, bs) => {
            if let Value::Ctor(c, _) = &**v {
                if bs.contains_key(c) {
                    rules.push("case");
                }
            }
        }
        // with the conservative oracle a δ never fires
        Term::Delta(..) => {}
        Term::TermVar(_) => {}
        Term::Val(v) => match v {
            Value::UnitProbe(inner) => {
                if inner.is_unit() {
                    rules.push("unit");
                }
            }
            Value::Scissors => {}
            _ => match &p.stack {
                Stack::Frame(..) => rules.push("frame"),
                Stack::Push(..) => {
                    if matches!(v, Value::Lam(..)) {
                        rules.push("beta");
                    }
                }
                Stack::Var(_) => {}
            },
        },
    }
    rules
}

/// Expected classification of a blocked process.
pub fn expected_block(p: &Process) -> &'static str {
    match &p.term {
        Term::Delta(..) => "delta",
        Term::TermVar(_) => "open",
        Term::Proj(v, _) => match &**v {
            Value::Var(_) => "open",
            Value::Scissors => "scissors",
            _ => "stuck",
        },
        Term::Case(v, _) => match &**v {
            Value::Var(_) => "open",
            Value::Scissors => "scissors",
            _ => "stuck",
        },
        Term::Val(Value::Scissors) => "scissors",
        Term::Val(Value::UnitProbe(v)) => match &**v {
            Value::Var(_) => "open",
            _ => "stuck",
        },
        Term::Val(v) => match &p.stack {
            Stack::Var(_) => "final",
            Stack::Push(..) => match v {
                Value::Var(_) => "open",
                _ => "stuck",
            },
            Stack::Frame(..) => unreachable!("frame rule applies"),
        },
        _ => unreachable!("a rule applies"),
    }
}

pub fn class_label(c: &BlockedClass) -> &'static str {
    match c {
        BlockedClass::Final(..) => "final",
        BlockedClass::Stuck(_) => "stuck",
        BlockedClass::DeltaLike(..) => "delta",
        BlockedClass::OpenLambdaVar(_) | BlockedClass::OpenTermVar(_) => "open",
        BlockedClass::ScissorsHit => "scissors",
    }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration over the 2-constructor/2-label alphabet with
// one variable of each kind.

pub struct Enumerator {
    values: Vec<Vec<Value>>,
    terms: Vec<Vec<Term>>,
    stacks: Vec<Vec<Stack>>,
}

impl Enumerator {
    pub fn new(max_size: usize) -> Enumerator {
        let mut e = Enumerator {
            values: vec![Vec::new(); max_size + 1],
            terms: vec![Vec::new(); max_size + 1],
            stacks: vec![Vec::new(); max_size + 1],
        };
        for size in 1..=max_size {
            e.fill(size);
        }
        e
    }

    pub fn values(&self, size: usize) -> &[Value] {
        &self.values[size]
    }

    pub fn terms(&self, size: usize) -> &[Term] {
        &self.terms[size]
    }

    pub fn stacks(&self, size: usize) -> &[Stack] {
        &self.stacks[size]
    }

    /// Visit every process with `term.size() + stack.size() ≤ max`.
    pub fn for_each_process(&self, max: usize, mut f: impl FnMut(&Process)) {
        for t_size in 1..=max.saturating_sub(1) {
            for s_size in 1..=(max - t_size) {
                for t in &self.terms[t_size] {
                    for s in &self.stacks[s_size] {
                        f(&Process::new(t.clone(), s.clone()));
                    }
                }
            }
        }
    }

    fn fill(&mut self, size: usize) {
        let ctors = [n("C"), n("D")];
        let labels = [n("l1"), n("l2")];
        let mut values = Vec::new();
        let mut terms = Vec::new();
        let mut stacks = Vec::new();

        if size == 1 {
            values.push(Value::Var(n("x")));
            values.push(Value::unit());
            values.push(Value::Scissors);
            stacks.push(Stack::Var(n("k")));
        } else {
            // λx t
            for t in &self.terms[size - 1] {
                values.push(Value::Lam(n("x"), Box::new(t.clone())));
            }
            // C[v], unit(v)
            for v in &self.values[size - 1] {
                for c in &ctors {
                    values.push(Value::Ctor(c.clone(), Box::new(v.clone())));
                }
                values.push(Value::UnitProbe(Box::new(v.clone())));
            }
            // one-field records
            for v in &self.values[size - 1] {
                for l in &labels {
                    let mut fs = BTreeMap::new();
                    fs.insert(l.clone(), v.clone());
                    values.push(Value::Record(fs));
                }
            }
            // two-field records
            for k in 1..size.saturating_sub(1) {
                let rest = size - 1 - k;
                if rest >= 1 {
                    for u in &self.values[k] {
                        for v in &self.values[rest] {
                            let mut fs = BTreeMap::new();
                            fs.insert(labels[0].clone(), u.clone());
                            fs.insert(labels[1].clone(), v.clone());
                            values.push(Value::Record(fs));
                        }
                    }
                }
            }
            // stacks
            for k in 1..size {
                let rest = size - 1 - k;
                if rest >= 1 {
                    for v in &self.values[k] {
                        for s in &self.stacks[rest] {
                            stacks.push(Stack::Push(Box::new(v.clone()), Box::new(s.clone())));
                        }
                    }
                    for t in &self.terms[k] {
                        for s in &self.stacks[rest] {
                            stacks.push(Stack::Frame(Box::new(t.clone()), Box::new(s.clone())));
                        }
                    }
                }
            }
        }

        // terms: values, plus the term-only formers
        terms.extend(values.iter().cloned().map(Term::Val));
        if size == 1 {
            terms.push(Term::TermVar(n("a")));
        } else {
            for k in 1..size {
                let rest = size - 1 - k;
                if rest >= 1 {
                    for t in &self.terms[k] {
                        for u in &self.terms[rest] {
                            terms.push(Term::app(t.clone(), u.clone()));
                        }
                    }
                    // t ∗ π as a term
                    for t in &self.terms[k] {
                        for s in &self.stacks[rest] {
                            terms.push(Term::Proc(Box::new(Process::new(
                                t.clone(),
                                s.clone(),
                            ))));
                        }
                    }
                    // δ(v, w)
                    for v in &self.values[k] {
                        for w in &self.values[rest] {
                            terms.push(Term::Delta(
                                Box::new(v.clone()),
                                Box::new(w.clone()),
                            ));
                        }
                    }
                }
            }
            for t in &self.terms[size - 1] {
                terms.push(Term::Mu(n("k"), Box::new(t.clone())));
            }
            for v in &self.values[size - 1] {
                for l in &labels {
                    terms.push(Term::Proj(Box::new(v.clone()), l.clone()));
                }
            }
            // case with a single branch (either constructor)
            for k in 1..size.saturating_sub(1) {
                let rest = size - 1 - k;
                if rest >= 1 {
                    for v in &self.values[k] {
                        for body in &self.terms[rest] {
                            for c in &ctors {
                                let mut bs = BTreeMap::new();
                                bs.insert(c.clone(), (n("x"), body.clone()));
                                terms.push(Term::Case(Box::new(v.clone()), bs));
                            }
                        }
                    }
                }
            }
            // case with both branches
            for k in 1..size.saturating_sub(2) {
                for k2 in 1..size.saturating_sub(1 + k) {
                    let rest = size - 1 - k - k2;
                    if rest >= 1 {
                        for v in &self.values[k] {
                            for b1 in &self.terms[k2] {
                                for b2 in &self.terms[rest] {
                                    let mut bs = BTreeMap::new();
                                    bs.insert(ctors[0].clone(), (n("x"), b1.clone()));
                                    bs.insert(ctors[1].clone(), (n("x"), b2.clone()));
                                    terms.push(Term::Case(Box::new(v.clone()), bs));
                                }
                            }
                        }
                    }
                }
            }
        }

        self.values[size] = values;
        self.terms[size] = terms;
        self.stacks[size] = stacks;
    }
}
