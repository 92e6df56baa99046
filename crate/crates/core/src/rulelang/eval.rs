//! Closed-world grounding of a rule set against one graph.

use std::collections::BTreeMap;

use super::{Atom, Head, Rule, RuleSet};
use crate::dnfmodel::enumerate_bindings;
use crate::error::{Error, Result};
use crate::signature::{GroundExample, PredicateSignature};

#[derive(Debug, Clone)]
struct CompiledRule {
    /// `(aux index, negated)` literals; these do not depend on the binding.
    aux: Vec<(usize, bool)>,
    /// Per binding, the `(ground index, negated)` of every other literal.
    grounded: Vec<Vec<(usize, bool)>>,
}

impl CompiledRule {
    fn compile(rule: &Rule, sig: &PredicateSignature, bindings: &[Vec<usize>]) -> Result<Self> {
        let mut aux = Vec::new();
        let mut templated = Vec::new();
        for lit in &rule.body {
            match lit.atom {
                Atom::Aux(k) => aux.push((k, lit.negated)),
                atom => {
                    check_range(&atom, sig)?;
                    templated.push((atom, lit.negated));
                }
            }
        }
        let grounded = bindings
            .iter()
            .map(|b| {
                templated
                    .iter()
                    .map(|(atom, neg)| {
                        let idx = sig
                            .ground_index(&atom.ground(b))
                            .expect("injective binding of an in-range atom");
                        (idx, *neg)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { aux, grounded })
    }

    fn holds(&self, atoms: &[i8], aux_values: &BTreeMap<usize, bool>) -> bool {
        let aux_ok = self.aux.iter().all(|(k, neg)| aux_values[k] != *neg);
        aux_ok
            && self
                .grounded
                .iter()
                .any(|lits| lits.iter().all(|&(i, neg)| (atoms[i] > 0) != neg))
    }
}

fn check_range(atom: &Atom, sig: &PredicateSignature) -> Result<()> {
    if sig.template_index(atom).is_some() {
        return Ok(());
    }
    let out_of_range = |kind, index, limit| Err(Error::OutOfRange { kind, index, limit });
    match *atom {
        Atom::Nullary(k) => out_of_range("nullary predicate", k, sig.num_nullary),
        Atom::Unary { var, .. } if var >= sig.num_vars => out_of_range("variable", var, sig.num_vars),
        Atom::Unary { pred, .. } => out_of_range("unary predicate", pred, sig.num_unary),
        Atom::Binary { subj, obj, pred } => {
            let var = subj.max(obj);
            if var >= sig.num_vars {
                out_of_range("variable", var, sig.num_vars)
            } else if subj == obj {
                Err(Error::InvalidSignature(format!(
                    "binary atom relates V{subj} to itself"
                )))
            } else {
                out_of_range("binary predicate", pred, sig.num_binary)
            }
        }
        Atom::Aux(_) => Ok(()),
    }
}

/// A rule set compiled against a signature, reusable across many graphs.
///
/// Every rule is grounded under all injective assignments of the
/// signature's variables to objects.
#[derive(Debug, Clone)]
pub struct Grounder {
    sig: PredicateSignature,
    target: Vec<CompiledRule>,
    aux: BTreeMap<usize, Vec<CompiledRule>>,
}

impl Grounder {
    pub fn new(rs: &RuleSet, sig: &PredicateSignature) -> Result<Self> {
        sig.validate()?;
        let bindings: Vec<Vec<usize>> = enumerate_bindings(sig.num_objects, sig.num_vars)?
            .into_iter()
            .map(|b| b.into_inner())
            .collect();
        let mut target = Vec::new();
        let mut aux: BTreeMap<usize, Vec<CompiledRule>> = BTreeMap::new();
        for rule in &rs.rules {
            let compiled = CompiledRule::compile(rule, sig, &bindings)?;
            match rule.head {
                Head::Target => target.push(compiled),
                Head::Aux(k) => {
                    if !compiled.aux.is_empty() {
                        return Err(Error::NotStratified(k));
                    }
                    aux.entry(k).or_default().push(compiled);
                }
            }
        }
        for rule in &target {
            if let Some((k, _)) = rule.aux.iter().find(|(k, _)| !aux.contains_key(k)) {
                return Err(Error::UndefinedAux(*k));
            }
        }
        Ok(Self {
            sig: *sig,
            target,
            aux,
        })
    }

    /// Decides `t` for a raw bipolar atom vector of the right length.
    pub fn evaluate_atoms(&self, atoms: &[i8]) -> bool {
        let empty = BTreeMap::new();
        let aux_values: BTreeMap<usize, bool> = self
            .aux
            .iter()
            .map(|(k, rules)| (*k, rules.iter().any(|r| r.holds(atoms, &empty))))
            .collect();
        self.target.iter().any(|r| r.holds(atoms, &aux_values))
    }

    pub fn evaluate(&self, ex: &GroundExample) -> Result<bool> {
        ex.check_shape(&self.sig)?;
        Ok(self.evaluate_atoms(&ex.atoms))
    }
}

/// Closed-world verdict of `t` for one graph.
pub fn evaluate(rs: &RuleSet, ex: &GroundExample, sig: &PredicateSignature) -> Result<bool> {
    Grounder::new(rs, sig)?.evaluate(ex)
}
