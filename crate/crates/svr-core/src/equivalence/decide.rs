//! The partial decision procedure. `Proved` and `Refuted` are sound with
//! respect to the semantical equivalence relation, given the hypotheses;
//! `Unknown` is always a permitted answer and is returned on any budget
//! exhaustion. A hypothesis set is contradictory exactly when saturation
//! merges the two sides of an inequivalence hypothesis or merges two
//! values with clashing shapes.

use crate::equivalence::egraph::{Contradiction, EGraph, NodeId, Reason};
use crate::equivalence::normalize::normalize_with_chain;
use crate::equivalence::search::SearchWitness;
use crate::equivalence::{Budget, EquationalContext, Polarity, RewriteStep};
use crate::syntax::Term;
use serde::Serialize;

pub use crate::equivalence::egraph::ClashKind;

/// One link of a congruence/rewrite chain in a certificate.
#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub from: String,
    pub to: String,
    pub by: String,
}

/// Replayable evidence for a verdict. All payloads are printable forms;
/// replay re-runs the procedure on the original claim.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// The two sides were merged by normalization, hypotheses, congruence
    /// and axiom instances.
    Merged {
        lhs_normalization: Vec<RewriteStep>,
        rhs_normalization: Vec<RewriteStep>,
        chain: Vec<ChainStep>,
        claims_used: Vec<usize>,
    },
    /// Two clashing value shapes were identified.
    Clash {
        clash: ClashKind,
        lhs: String,
        rhs: String,
        chain: Vec<ChainStep>,
    },
    /// An inequivalence hypothesis had its sides merged.
    InequationViolated {
        claim: usize,
        lhs: String,
        rhs: String,
        chain: Vec<ChainStep>,
    },
    /// The hypotheses alone are contradictory, so anything follows.
    ContextContradictory { inner: Box<Certificate> },
    /// A behavioural counterexample from the search engine.
    Witness(SearchWitness),
}

/// Three-valued answer of the decision procedure.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Proved { certificate: Box<Certificate> },
    Refuted { certificate: Box<Certificate> },
    Unknown,
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown)
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::Proved { certificate } | Verdict::Refuted { certificate } => {
                Some(certificate)
            }
            Verdict::Unknown => None,
        }
    }
}

struct LoadedGraph {
    graph: EGraph,
    lhs: NodeId,
    rhs: NodeId,
    lhs_norm: Vec<RewriteStep>,
    rhs_norm: Vec<RewriteStep>,
}

/// Normalize the context and goal, intern everything, saturate once.
fn load(
    ectx: &EquationalContext,
    lhs: &Term,
    rhs: &Term,
    budget: &Budget,
) -> Option<LoadedGraph> {
    let mut graph = EGraph::new(budget);
    let fuel = budget.machine_fuel;
    for (i, claim) in ectx.claims.iter().enumerate() {
        let l = graph.intern(&crate::equivalence::normalize(&claim.lhs, fuel))?;
        let r = graph.intern(&crate::equivalence::normalize(&claim.rhs, fuel))?;
        match claim.polarity {
            Polarity::Equiv => {
                graph.union(l, r, Reason::Claim(i));
            }
            Polarity::Inequiv => graph.assert_neq(l, r, i),
        }
    }
    let (lhs_n, lhs_norm) = normalize_with_chain(lhs, fuel);
    let (rhs_n, rhs_norm) = normalize_with_chain(rhs, fuel);
    let lhs = graph.intern(&lhs_n)?;
    let rhs = graph.intern(&rhs_n)?;
    graph.saturate();
    Some(LoadedGraph { graph, lhs, rhs, lhs_norm, rhs_norm })
}

fn contradiction_certificate(graph: &mut EGraph) -> Certificate {
    match graph.contradiction().cloned() {
        Some(Contradiction::Clash { kind, lhs, rhs }) => {
            let chain = graph
                .explain(lhs, rhs)
                .into_iter()
                .map(|(from, to, by)| ChainStep { from, to, by })
                .collect();
            Certificate::Clash {
                clash: kind,
                lhs: graph.node_term(lhs).to_string(),
                rhs: graph.node_term(rhs).to_string(),
                chain,
            }
        }
        Some(Contradiction::InequationMerged { claim, lhs, rhs }) => {
            let chain = graph
                .explain(lhs, rhs)
                .into_iter()
                .map(|(from, to, by)| ChainStep { from, to, by })
                .collect();
            Certificate::InequationViolated {
                claim,
                lhs: graph.node_term(lhs).to_string(),
                rhs: graph.node_term(rhs).to_string(),
                chain,
            }
        }
        None => unreachable!("no contradiction present"),
    }
}

/// Decide a claim under a set of hypotheses. For an `Equiv` claim:
/// `Proved` when the sides merge (or the hypotheses are contradictory),
/// `Refuted` when assuming the claim contradicts the hypotheses. For an
/// `Inequiv` claim the two answers swap roles.
pub fn decide(
    ectx: &EquationalContext,
    lhs: &Term,
    rhs: &Term,
    polarity: Polarity,
    budget: &Budget,
) -> Verdict {
    let Some(mut loaded) = load(ectx, lhs, rhs, budget) else {
        return Verdict::Unknown;
    };

    if loaded.graph.contradiction().is_some() {
        let inner = contradiction_certificate(&mut loaded.graph);
        return Verdict::Proved {
            certificate: Box::new(Certificate::ContextContradictory { inner: Box::new(inner) }),
        };
    }

    let merged = loaded.graph.same_class(loaded.lhs, loaded.rhs);
    let equal_verdict = |mut loaded: LoadedGraph| {
        let chain = loaded
            .graph
            .explain(loaded.lhs, loaded.rhs)
            .into_iter()
            .map(|(from, to, by)| ChainStep { from, to, by })
            .collect();
        let claims_used = loaded
            .graph
            .claims_used(loaded.lhs, loaded.rhs)
            .into_iter()
            .collect();
        Certificate::Merged {
            lhs_normalization: loaded.lhs_norm,
            rhs_normalization: loaded.rhs_norm,
            chain,
            claims_used,
        }
    };

    if merged {
        let cert = Box::new(equal_verdict(loaded));
        return match polarity {
            Polarity::Equiv => Verdict::Proved { certificate: cert },
            Polarity::Inequiv => Verdict::Refuted { certificate: cert },
        };
    }

    // Not merged: probe whether assuming equality is contradictory.
    let Some(mut probe) = load(ectx, lhs, rhs, budget) else {
        return Verdict::Unknown;
    };
    probe.graph.union(probe.lhs, probe.rhs, Reason::Assumed);
    probe.graph.saturate();
    if probe.graph.contradiction().is_some() {
        let cert = Box::new(contradiction_certificate(&mut probe.graph));
        return match polarity {
            Polarity::Equiv => Verdict::Refuted { certificate: cert },
            Polarity::Inequiv => Verdict::Proved { certificate: cert },
        };
    }
    Verdict::Unknown
}

/// Find a syntactic value provably equivalent to `t` under the
/// hypotheses: the saturated graph is inspected for a value in `t`'s
/// class, and the accompanying verdict replays as a `decide` call. In a
/// contradictory context every value qualifies; the empty record is
/// returned.
pub fn find_equivalent_value(
    ectx: &EquationalContext,
    t: &Term,
    budget: &Budget,
) -> Option<(crate::syntax::Value, Verdict)> {
    let loaded = load(ectx, t, t, budget)?;
    if loaded.graph.contradiction().is_some() {
        let v = crate::syntax::Value::unit();
        let verdict = decide(ectx, t, &Term::Val(v.clone()), Polarity::Equiv, budget);
        return verdict.is_proved().then_some((v, verdict));
    }
    let value = loaded.graph.class_value(loaded.lhs)?.clone();
    let Term::Val(v) = value else { return None };
    let verdict = decide(ectx, t, &Term::Val(v.clone()), Polarity::Equiv, budget);
    verdict.is_proved().then_some((v, verdict))
}

/// Is the context itself contradictory? `Proved` means yes; consistency
/// is never provable by this procedure, so the other answer is `Unknown`.
pub fn context_contradictory(ectx: &EquationalContext, budget: &Budget) -> Verdict {
    let unit = Term::Val(crate::syntax::Value::unit());
    let Some(mut loaded) = load(ectx, &unit, &unit, budget) else {
        return Verdict::Unknown;
    };
    if loaded.graph.contradiction().is_some() {
        let inner = contradiction_certificate(&mut loaded.graph);
        Verdict::Proved { certificate: Box::new(inner) }
    } else {
        Verdict::Unknown
    }
}
