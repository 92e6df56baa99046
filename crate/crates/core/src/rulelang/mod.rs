//! The restricted rule language: syntax tree, printer, parser and a
//! brute-force grounder that decides the target `t` for a single graph.
//!
//! Rules look like
//!
//! ```text
//! t :- nullary(0), not unary(V0,2), binary(V0,V1,1), obj(V0), V0 != V1, obj(V1).
//! t :- not c0t.
//! c0t :- unary(V0,1), obj(V0).
//! ```
//!
//! `obj(..)` and `!=` guards are derived syntax: the printer emits them so the
//! text is safe for an ASP solver, the parser drops them again. Injectivity
//! of variables is enforced by the grounder's bindings.

mod eval;
mod format;
mod parse;

use std::collections::BTreeSet;

pub use eval::{evaluate, Grounder};
pub use format::format_ruleset;
pub use parse::parse_ruleset;

/// A body or head atom. Arguments of unary/binary atoms are variable indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Nullary(usize),
    Unary { var: usize, pred: usize },
    Binary { subj: usize, obj: usize, pred: usize },
    /// The auxiliary propositional predicate `c<k>t`.
    Aux(usize),
}

impl Atom {
    pub fn variables(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Atom::Unary { var, .. } => (Some(var), None),
            Atom::Binary { subj, obj, .. } => (Some(subj), Some(obj)),
            Atom::Nullary(_) | Atom::Aux(_) => (None, None),
        };
        a.into_iter().chain(b)
    }

    /// Re-indexes the arguments through a variable-to-object map.
    pub fn ground(&self, binding: &[usize]) -> Atom {
        match *self {
            Atom::Unary { var, pred } => Atom::Unary {
                var: binding[var],
                pred,
            },
            Atom::Binary { subj, obj, pred } => Atom::Binary {
                subj: binding[subj],
                obj: binding[obj],
                pred,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    /// Negation as failure.
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Self {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Self {
            atom,
            negated: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    Target,
    Aux(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Head, body: Vec<Literal>) -> Self {
        Self { head, body }
    }

    /// Variables occurring anywhere in the rule, ascending.
    pub fn variables(&self) -> BTreeSet<usize> {
        self.body.iter().flat_map(|l| l.atom.variables()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        Self { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }
}

impl std::fmt::Display for RuleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_ruleset(self))
    }
}
