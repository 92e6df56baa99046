//! The DNF rule-learning network.
//!
//! Each rule is a conjunctive semi-symbolic unit over the template atoms.
//! A graph is grounded under every injective variable binding, each rule
//! takes the max over its bindings (the existential), and a disjunctive unit
//! combines the rule scores into the target score.

mod binding;
mod extract;
mod model;

pub use binding::{enumerate_bindings, ground_gather, Binding, GatherTable};
pub use extract::{encode_rules, extract_rules};
pub use model::{dnf_backward, dnf_forward, DnfGradient, DnfModel, DnfOutput};
