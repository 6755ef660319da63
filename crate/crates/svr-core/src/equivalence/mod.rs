//! Two independent engines for the observational equivalence relation:
//!
//! * [`decide`] — a partial decision procedure working from equational
//!   axioms (value-β, projection and case analysis on literal data),
//!   congruence closure over the hypotheses of an equational context, and
//!   clash axioms on data with distinct shapes. Sound in both directions;
//!   answers `Unknown` whenever its budget runs out.
//! * [`search_inequivalence`] — a bounded enumeration of stack contexts
//!   and closed substitutions looking for a behavioural counterexample on
//!   the machine. Used to cross-check the decision procedure and as the
//!   machine's δ-oracle.

mod decide;
mod egraph;
mod normalize;
mod search;

pub use decide::{
    context_contradictory, decide, find_equivalent_value, Certificate, ClashKind, Verdict,
};
pub use normalize::{normalize, normalize_with_chain, AxiomKind, RewriteStep};
pub use search::{search_inequivalence, SearchOracle, SearchWitness, Side};

use crate::syntax::Term;
use serde::Serialize;

/// Resource limits for the equivalence engines. Every component is a hard
/// bound; exhausting any of them yields `Unknown` (or a "suspected"
/// witness), never a wrong answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Machine steps per probe execution; also bounds rewriting.
    pub machine_fuel: u64,
    /// Maximum number of stack-context layers in the search.
    pub search_depth: usize,
    /// Maximum size of substituted values in the search.
    pub subst_size: usize,
    /// Stratification depth: a δ fires only if a search at strictly
    /// smaller index finds a sound witness.
    pub delta_index: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            machine_fuel: 100_000,
            search_depth: 3,
            subst_size: 3,
            delta_index: 2,
        }
    }
}

impl Budget {
    /// Node cap for the saturation graph, derived from the fuel.
    pub(crate) fn node_cap(&self) -> usize {
        (self.machine_fuel / 10).clamp(2_000, 200_000) as usize
    }

    /// Axiom-instantiation cap for the saturation graph.
    pub(crate) fn rewrite_cap(&self) -> u64 {
        self.machine_fuel.clamp(1_000, 1_000_000)
    }
}

/// Whether a claim asserts an equivalence or an inequivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Equiv,
    Inequiv,
}

/// One hypothetical (in)equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub lhs: Term,
    pub rhs: Term,
    pub polarity: Polarity,
}

impl Claim {
    pub fn equiv(lhs: Term, rhs: Term) -> Claim {
        Claim { lhs, rhs, polarity: Polarity::Equiv }
    }

    pub fn inequiv(lhs: Term, rhs: Term) -> Claim {
        Claim { lhs, rhs, polarity: Polarity::Inequiv }
    }
}

/// An ordered list of hypothetical equivalences and inequivalences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquationalContext {
    pub claims: Vec<Claim>,
}

impl EquationalContext {
    pub fn new(claims: Vec<Claim>) -> Self {
        EquationalContext { claims }
    }

    pub fn push(&mut self, claim: Claim) {
        self.claims.push(claim);
    }

    pub fn is_empty(&self) -> bool {
        self.claims.is_empty()
    }
}
