//! Ground completion over a term graph: congruence closure (union-find
//! with an explanation forest) interleaved with bounded instantiation of
//! the three equational axiom schemata. Terms with binders participate as
//! whole-term alpha-equivalence atoms, except that case scrutinees and
//! constructor/record/application components are congruence children.
//!
//! Everything here is deterministic: nodes are processed in insertion
//! order and all maps iterate in sorted or insertion order.

use crate::equivalence::normalize::AxiomKind;
use crate::equivalence::Budget;
use crate::syntax::{
    alpha_canonical_term, subst_term, Binding, Name, Term, Value,
};
use std::collections::{BTreeSet, HashMap, HashSet};

pub type NodeId = usize;

/// Clash axioms on values of distinct shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClashKind {
    DistinctCtors,
    RecordFieldMismatch,
    LambdaVsCtor,
    LambdaVsRecord,
    CtorVsRecord,
}

/// Why two nodes were merged (edges of the explanation forest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    /// A hypothesis of the equational context, by index.
    Claim(usize),
    /// An axiom schema instance.
    Axiom(AxiomKind),
    /// Equal signatures with equal children.
    Congruence,
    /// The goal claim, asserted during a refutation probe.
    Assumed,
}

impl Reason {
    pub fn describe(&self) -> String {
        match self {
            Reason::Claim(i) => format!("hypothesis #{i}"),
            Reason::Axiom(a) => format!("axiom {a:?}"),
            Reason::Congruence => "congruence".to_string(),
            Reason::Assumed => "assumed goal".to_string(),
        }
    }
}

/// A discovered contradiction.
#[derive(Clone, Debug)]
pub enum Contradiction {
    Clash { kind: ClashKind, lhs: NodeId, rhs: NodeId },
    /// The two sides of an inequivalence hypothesis were merged.
    InequationMerged { claim: usize, lhs: NodeId, rhs: NodeId },
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum OpSig {
    /// Whole-term atom identified up to alpha (lambdas, mus, processes).
    Atom(Term),
    VarLam(Name),
    VarTerm(Name),
    Scissors,
    UnitProbe,
    Ctor(Name),
    Record(Vec<Name>),
    App,
    Proj(Name),
    /// Case with the given canonicalized branch table; the scrutinee is
    /// the single congruence child.
    CaseShape(Term),
    Delta,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Head {
    Lam,
    Ctor,
    Record,
}

struct NodeData {
    term: Term,
    sig: OpSig,
    children: Vec<NodeId>,
    /// Clashable head shape, if the node is a data value.
    head: Option<Head>,
}

struct ClassData {
    /// Representative node with a clashable head, if any.
    head_node: Option<NodeId>,
    /// Smallest node whose term is a syntactic value.
    value_node: Option<NodeId>,
}

pub struct EGraph {
    nodes: Vec<NodeData>,
    parent: Vec<NodeId>,
    classes: HashMap<NodeId, ClassData>,
    memo: HashMap<(OpSig, Vec<NodeId>), NodeId>,
    expl: Vec<Option<(NodeId, Reason)>>,
    neq_claims: Vec<(NodeId, NodeId, usize)>,
    contradiction: Option<Contradiction>,
    node_cap: usize,
    rewrite_budget: u64,
    fired: HashSet<(NodeId, NodeId, Option<NodeId>)>,
    /// Set when a cap was hit; negative answers must become Unknown.
    pub exhausted: bool,
}

impl EGraph {
    pub fn new(budget: &Budget) -> EGraph {
        EGraph {
            nodes: Vec::new(),
            parent: Vec::new(),
            classes: HashMap::new(),
            memo: HashMap::new(),
            expl: Vec::new(),
            neq_claims: Vec::new(),
            contradiction: None,
            node_cap: budget.node_cap(),
            rewrite_budget: budget.rewrite_cap(),
            fired: HashSet::new(),
            exhausted: false,
        }
    }

    pub fn find(&self, mut x: NodeId) -> NodeId {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub fn same_class(&self, a: NodeId, b: NodeId) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn contradiction(&self) -> Option<&Contradiction> {
        self.contradiction.as_ref()
    }

    pub fn node_term(&self, id: NodeId) -> &Term {
        &self.nodes[id].term
    }

    /// A syntactic value in the class of `id`, if any.
    pub fn class_value(&self, id: NodeId) -> Option<&Term> {
        let root = self.find(id);
        let v = self.classes.get(&root)?.value_node?;
        Some(&self.nodes[v].term)
    }

    fn head_of(v: &Value) -> Option<Head> {
        match v {
            Value::Lam(..) => Some(Head::Lam),
            Value::Ctor(..) => Some(Head::Ctor),
            Value::Record(_) => Some(Head::Record),
            _ => None,
        }
    }

    /// Intern a term, creating nodes for it and its congruence-relevant
    /// subterms. Returns `None` when the node cap is reached.
    pub fn intern(&mut self, t: &Term) -> Option<NodeId> {
        let (sig, children) = match t {
            Term::Val(Value::Var(x)) => (OpSig::VarLam(x.clone()), vec![]),
            Term::Val(Value::Scissors) => (OpSig::Scissors, vec![]),
            Term::Val(Value::Lam(..)) | Term::Mu(..) | Term::Proc(_) => {
                (OpSig::Atom(alpha_canonical_term(t)), vec![])
            }
            Term::Val(Value::Ctor(c, payload)) => {
                let child = self.intern(&Term::Val((**payload).clone()))?;
                (OpSig::Ctor(c.clone()), vec![child])
            }
            Term::Val(Value::Record(fs)) => {
                let labels: Vec<Name> = fs.keys().cloned().collect();
                let mut children = Vec::with_capacity(fs.len());
                for v in fs.values() {
                    children.push(self.intern(&Term::Val(v.clone()))?);
                }
                (OpSig::Record(labels), children)
            }
            Term::Val(Value::UnitProbe(v)) => {
                let child = self.intern(&Term::Val((**v).clone()))?;
                (OpSig::UnitProbe, vec![child])
            }
            Term::TermVar(a) => (OpSig::VarTerm(a.clone()), vec![]),
            Term::App(f, a) => {
                let f = self.intern(f)?;
                let a = self.intern(a)?;
                (OpSig::App, vec![f, a])
            }
            Term::Proj(v, l) => {
                let child = self.intern(&Term::Val((**v).clone()))?;
                (OpSig::Proj(l.clone()), vec![child])
            }
            Term::Case(v, bs) => {
                let child = self.intern(&Term::Val((**v).clone()))?;
                let hole = Box::new(Value::Var(Name::new("!scrut")));
                let shape = alpha_canonical_term(&Term::Case(hole, bs.clone()));
                (OpSig::CaseShape(shape), vec![child])
            }
            Term::Delta(v, w) => {
                let v = self.intern(&Term::Val((**v).clone()))?;
                let w = self.intern(&Term::Val((**w).clone()))?;
                (OpSig::Delta, vec![v, w])
            }
        };
        let canon_children: Vec<NodeId> = children.iter().map(|&c| self.find(c)).collect();
        if let Some(&id) = self.memo.get(&(sig.clone(), canon_children.clone())) {
            return Some(id);
        }
        if self.nodes.len() >= self.node_cap {
            self.exhausted = true;
            return None;
        }
        let id = self.nodes.len();
        let head = t.as_value().and_then(Self::head_of);
        self.nodes.push(NodeData { term: t.clone(), sig: sig.clone(), children, head });
        self.parent.push(id);
        self.expl.push(None);
        self.classes.insert(
            id,
            ClassData {
                head_node: head.map(|_| id),
                value_node: t.is_value().then_some(id),
            },
        );
        self.memo.insert((sig, canon_children), id);
        Some(id)
    }

    pub fn assert_neq(&mut self, lhs: NodeId, rhs: NodeId, claim: usize) {
        self.neq_claims.push((lhs, rhs, claim));
    }

    fn clash_of(&self, a: NodeId, b: NodeId) -> Option<ClashKind> {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let (ha, hb) = (na.head?, nb.head?);
        match (ha, hb) {
            (Head::Lam, Head::Lam) => None,
            (Head::Ctor, Head::Ctor) => {
                match (&na.sig, &nb.sig) {
                    (OpSig::Ctor(c), OpSig::Ctor(d)) if c != d => {
                        Some(ClashKind::DistinctCtors)
                    }
                    _ => None,
                }
            }
            (Head::Record, Head::Record) => match (&na.sig, &nb.sig) {
                (OpSig::Record(i), OpSig::Record(j)) if i != j => {
                    Some(ClashKind::RecordFieldMismatch)
                }
                _ => None,
            },
            (Head::Lam, Head::Ctor) | (Head::Ctor, Head::Lam) => Some(ClashKind::LambdaVsCtor),
            (Head::Lam, Head::Record) | (Head::Record, Head::Lam) => {
                Some(ClashKind::LambdaVsRecord)
            }
            (Head::Ctor, Head::Record) | (Head::Record, Head::Ctor) => {
                Some(ClashKind::CtorVsRecord)
            }
        }
    }

    /// Reverse the explanation path from `x` so that `x` becomes the root
    /// of its explanation tree.
    fn reroot_explanation(&mut self, x: NodeId) {
        let mut prev: Option<(NodeId, Reason)> = None;
        let mut cur = x;
        loop {
            let next = self.expl[cur].take();
            if let Some(p) = prev {
                self.expl[cur] = Some(p);
            }
            match next {
                Some((n, r)) => {
                    prev = Some((cur, r));
                    cur = n;
                }
                None => break,
            }
        }
    }

    pub fn union(&mut self, a: NodeId, b: NodeId, reason: Reason) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.reroot_explanation(a);
        self.expl[a] = Some((b, reason));

        // merge class data of ra into rb
        let ca = self.classes.remove(&ra).expect("class data");
        let cb = self.classes.get_mut(&rb).expect("class data");
        let head_node = match (ca.head_node, cb.head_node) {
            (Some(x), Some(y)) => {
                if self.contradiction.is_none() {
                    if let Some(kind) = self.clash_of(x, y) {
                        self.contradiction =
                            Some(Contradiction::Clash { kind, lhs: x, rhs: y });
                    }
                }
                Some(x.min(y))
            }
            (x, y) => x.or(y),
        };
        let cb = self.classes.get_mut(&rb).expect("class data");
        cb.head_node = head_node;
        cb.value_node = match (ca.value_node, cb.value_node) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        self.parent[ra] = rb;
        true
    }

    /// Re-canonicalize signatures and merge nodes that became congruent,
    /// then re-check inequivalence hypotheses. Runs to a fixpoint.
    fn rebuild(&mut self) {
        loop {
            let mut key_to_node: HashMap<(OpSig, Vec<NodeId>), NodeId> = HashMap::new();
            let mut merges: Vec<(NodeId, NodeId)> = Vec::new();
            for id in 0..self.nodes.len() {
                let key = (
                    self.nodes[id].sig.clone(),
                    self.nodes[id].children.iter().map(|&c| self.find(c)).collect(),
                );
                match key_to_node.get(&key) {
                    Some(&prev) if !self.same_class(prev, id) => merges.push((prev, id)),
                    Some(_) => {}
                    None => {
                        key_to_node.insert(key, id);
                    }
                }
            }
            if merges.is_empty() {
                break;
            }
            for (a, b) in merges {
                self.union(a, b, Reason::Congruence);
            }
        }
        if self.contradiction.is_none() {
            for &(l, r, claim) in &self.neq_claims {
                if self.same_class(l, r) {
                    self.contradiction =
                        Some(Contradiction::InequationMerged { claim, lhs: l, rhs: r });
                    break;
                }
            }
        }
    }

    /// One pass of axiom instantiation over the current classes.
    /// Returns true if anything new fired.
    fn instantiate_axioms(&mut self) -> bool {
        let mut fired_any = false;
        let n = self.nodes.len();
        for id in 0..n {
            if self.rewrite_budget == 0 {
                self.exhausted = true;
                break;
            }
            match self.nodes[id].sig.clone() {
                OpSig::App => {
                    let f = self.find(self.nodes[id].children[0]);
                    let a = self.find(self.nodes[id].children[1]);
                    let Some(lam_node) = self.class_lambda(f) else { continue };
                    let Some(arg_node) = self.classes[&a].value_node else { continue };
                    let Some(arg_val) = self.nodes[arg_node].term.as_value().cloned() else {
                        continue;
                    };
                    if matches!(arg_val, Value::Scissors | Value::UnitProbe(_)) {
                        // not a beta argument: the machine fails on it
                        // before it ever reaches the function
                        continue;
                    }
                    if !self.fired.insert((id, lam_node, Some(arg_node))) {
                        continue;
                    }
                    let Term::Val(Value::Lam(x, body)) = self.nodes[lam_node].term.clone()
                    else {
                        continue;
                    };
                    let contractum = subst_term(&body, Binding::LambdaVar(x, arg_val));
                    if let Some(c) = self.intern(&contractum) {
                        self.rewrite_budget -= 1;
                        self.union(id, c, Reason::Axiom(AxiomKind::ValueBeta));
                        fired_any = true;
                    }
                }
                OpSig::Proj(l) => {
                    let v = self.find(self.nodes[id].children[0]);
                    let Some(rec_node) = self.class_record(v) else { continue };
                    if !self.fired.insert((id, rec_node, None)) {
                        continue;
                    }
                    let Term::Val(Value::Record(fs)) = self.nodes[rec_node].term.clone() else {
                        continue;
                    };
                    let Some(field) = fs.get(&l) else { continue };
                    if let Some(c) = self.intern(&Term::Val(field.clone())) {
                        self.rewrite_budget -= 1;
                        self.union(id, c, Reason::Axiom(AxiomKind::Projection));
                        fired_any = true;
                    }
                }
                OpSig::CaseShape(_) => {
                    let scrut = self.find(self.nodes[id].children[0]);
                    let Some(ctor_node) = self.class_ctor(scrut) else { continue };
                    if !self.fired.insert((id, ctor_node, None)) {
                        continue;
                    }
                    let Term::Val(Value::Ctor(c, payload)) = self.nodes[ctor_node].term.clone()
                    else {
                        continue;
                    };
                    let Term::Case(_, bs) = &self.nodes[id].term else { continue };
                    let Some((x, branch_body)) = bs.get(&c).cloned() else { continue };
                    let contractum =
                        subst_term(&branch_body, Binding::LambdaVar(x, (*payload).clone()));
                    if let Some(cn) = self.intern(&contractum) {
                        self.rewrite_budget -= 1;
                        self.union(id, cn, Reason::Axiom(AxiomKind::CaseLiteral));
                        fired_any = true;
                    }
                }
                _ => {}
            }
        }
        fired_any
    }

    fn class_lambda(&self, root: NodeId) -> Option<NodeId> {
        let h = self.classes[&root].head_node?;
        matches!(self.nodes[h].head, Some(Head::Lam)).then_some(h)
    }

    fn class_record(&self, root: NodeId) -> Option<NodeId> {
        let h = self.classes[&root].head_node?;
        matches!(self.nodes[h].head, Some(Head::Record)).then_some(h)
    }

    fn class_ctor(&self, root: NodeId) -> Option<NodeId> {
        let h = self.classes[&root].head_node?;
        matches!(self.nodes[h].head, Some(Head::Ctor)).then_some(h)
    }

    /// Run congruence closure and axiom instantiation to a fixpoint (or a
    /// budget cap, or a contradiction).
    pub fn saturate(&mut self) {
        loop {
            self.rebuild();
            if self.contradiction.is_some() {
                return;
            }
            if !self.instantiate_axioms() {
                return;
            }
        }
    }

    /// The explanation-forest path between two merged nodes, as printable
    /// steps. Congruence edges are reported shallowly.
    pub fn explain(&mut self, a: NodeId, b: NodeId) -> Vec<(String, String, String)> {
        debug_assert!(self.same_class(a, b));
        let path = |g: &EGraph, mut x: NodeId| {
            let mut out = vec![x];
            while let Some((next, _)) = &g.expl[x] {
                x = *next;
                out.push(x);
            }
            out
        };
        let pa = path(self, a);
        let pb = path(self, b);
        let in_pa: HashSet<NodeId> = pa.iter().copied().collect();
        let common = pb.iter().find(|n| in_pa.contains(n)).copied();
        let Some(common) = common else { return Vec::new() };
        let mut steps = Vec::new();
        let mut x = a;
        while x != common {
            let (next, reason) = self.expl[x].clone().expect("path edge");
            steps.push((
                self.nodes[x].term.to_string(),
                self.nodes[next].term.to_string(),
                reason.describe(),
            ));
            x = next;
        }
        let mut tail = Vec::new();
        let mut y = b;
        while y != common {
            let (next, reason) = self.expl[y].clone().expect("path edge");
            tail.push((
                self.nodes[next].term.to_string(),
                self.nodes[y].term.to_string(),
                reason.describe(),
            ));
            y = next;
        }
        tail.reverse();
        steps.extend(tail);
        steps
    }

    /// Claim indices appearing in the explanation between two nodes.
    pub fn claims_used(&self, a: NodeId, b: NodeId) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let collect = |g: &EGraph, mut x: NodeId, out: &mut BTreeSet<usize>| {
            while let Some((next, reason)) = &g.expl[x] {
                if let Reason::Claim(i) = reason {
                    out.insert(*i);
                }
                x = *next;
            }
        };
        collect(self, a, &mut out);
        collect(self, b, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Name;
    use std::collections::BTreeMap;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn ctor(c: &str, v: Value) -> Term {
        Term::Val(Value::Ctor(n(c), Box::new(v)))
    }

    #[test]
    fn congruence_through_ctor() {
        let budget = Budget::default();
        let mut g = EGraph::new(&budget);
        let a = g.intern(&Term::TermVar(n("a"))).unwrap();
        let zb = g.intern(&ctor("Z", Value::Var(n("b")))).unwrap();
        g.union(a, zb, Reason::Claim(0));
        let sa = g.intern(&ctor("S", Value::Var(n("a'")))).unwrap();
        // S[a'] with a' ≡ a should merge with S[Z[b]]... via congruence
        let ap = g.intern(&Term::var("a'")).unwrap();
        let av = g.intern(&Term::TermVar(n("a"))).unwrap();
        assert_eq!(av, a);
        g.union(ap, av, Reason::Claim(1));
        let s_of_zb = g
            .intern(&ctor("S", Value::Ctor(n("Z"), Box::new(Value::Var(n("b"))))))
            .unwrap();
        g.saturate();
        assert!(g.same_class(sa, s_of_zb));
    }

    #[test]
    fn clash_on_distinct_ctors() {
        let budget = Budget::default();
        let mut g = EGraph::new(&budget);
        let c = g.intern(&ctor("C", Value::unit())).unwrap();
        let d = g.intern(&ctor("D", Value::unit())).unwrap();
        g.union(c, d, Reason::Claim(0));
        g.saturate();
        assert!(matches!(
            g.contradiction(),
            Some(Contradiction::Clash { kind: ClashKind::DistinctCtors, .. })
        ));
    }

    #[test]
    fn beta_instantiation_fires() {
        let budget = Budget::default();
        let mut g = EGraph::new(&budget);
        // f ≡ λx x, then (f {}) should merge with {}
        let f = g.intern(&Term::var("f")).unwrap();
        let id_lam = g.intern(&Term::lam("x", Term::var("x"))).unwrap();
        g.union(f, id_lam, Reason::Claim(0));
        let app = g
            .intern(&Term::app(Term::var("f"), Term::Val(Value::unit())))
            .unwrap();
        let unit = g.intern(&Term::Val(Value::unit())).unwrap();
        g.saturate();
        assert!(g.same_class(app, unit));
        assert!(!g.explain(app, unit).is_empty());
    }

    #[test]
    fn record_mismatch_clash() {
        let budget = Budget::default();
        let mut g = EGraph::new(&budget);
        let mut f1 = BTreeMap::new();
        f1.insert(n("l1"), Value::unit());
        let r1 = g.intern(&Term::Val(Value::Record(f1))).unwrap();
        let r2 = g.intern(&Term::Val(Value::unit())).unwrap();
        g.union(r1, r2, Reason::Claim(0));
        g.saturate();
        assert!(matches!(
            g.contradiction(),
            Some(Contradiction::Clash { kind: ClashKind::RecordFieldMismatch, .. })
        ));
    }

    #[test]
    fn neq_claim_contradiction() {
        let budget = Budget::default();
        let mut g = EGraph::new(&budget);
        let a = g.intern(&Term::TermVar(n("a"))).unwrap();
        let b = g.intern(&Term::TermVar(n("b"))).unwrap();
        g.assert_neq(a, b, 1);
        g.union(a, b, Reason::Claim(0));
        g.saturate();
        assert!(matches!(
            g.contradiction(),
            Some(Contradiction::InequationMerged { claim: 1, .. })
        ));
    }
}
