//! Predicate signatures and the canonical atom layout.
//!
//! Both the ground atom vector of a graph and the template atom vector of a
//! rule use the same layout over `m` objects (objects for ground atoms,
//! variables for templates):
//!
//! ```text
//! nullary(k)      -> k
//! unary(o, k)     -> N0 + o*N1 + k
//! binary(s, o, k) -> N0 + m*N1 + (s*(m-1) + o')*N2 + k,   o' = o - [o > s]
//! ```
//!
//! Binary atoms never relate an object to itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rulelang::Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicateSignature {
    pub num_nullary: usize,
    pub num_unary: usize,
    pub num_binary: usize,
    pub num_objects: usize,
    pub num_vars: usize,
    pub num_rules: usize,
}

impl PredicateSignature {
    pub fn new(
        num_nullary: usize,
        num_unary: usize,
        num_binary: usize,
        num_objects: usize,
        num_vars: usize,
        num_rules: usize,
    ) -> Result<Self> {
        let sig = Self {
            num_nullary,
            num_unary,
            num_binary,
            num_objects,
            num_vars,
            num_rules,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars > self.num_objects {
            return Err(Error::InvalidSignature(format!(
                "{} variables exceed {} objects",
                self.num_vars, self.num_objects
            )));
        }
        if self.num_rules == 0 {
            return Err(Error::InvalidSignature("at least one rule is required".into()));
        }
        Ok(())
    }

    fn atom_count(&self, m: usize) -> usize {
        self.num_nullary + m * self.num_unary + m * m.saturating_sub(1) * self.num_binary
    }

    /// Template atom count `A`.
    pub fn template_atoms(&self) -> usize {
        self.atom_count(self.num_vars)
    }

    /// Ground atom count `D`.
    pub fn ground_atoms(&self) -> usize {
        self.atom_count(self.num_objects)
    }

    fn index(&self, m: usize, atom: &Atom) -> Option<usize> {
        let (n0, n1, n2) = (self.num_nullary, self.num_unary, self.num_binary);
        match *atom {
            Atom::Nullary(k) if k < n0 => Some(k),
            Atom::Unary { var, pred } if var < m && pred < n1 => Some(n0 + var * n1 + pred),
            Atom::Binary { subj, obj, pred } if subj < m && obj < m && subj != obj && pred < n2 => {
                let o = if obj > subj { obj - 1 } else { obj };
                Some(n0 + m * n1 + (subj * (m - 1) + o) * n2 + pred)
            }
            _ => None,
        }
    }

    /// Position of a template atom (arguments are variables).
    pub fn template_index(&self, atom: &Atom) -> Option<usize> {
        self.index(self.num_vars, atom)
    }

    /// Position of a ground atom (arguments are objects).
    pub fn ground_index(&self, atom: &Atom) -> Option<usize> {
        self.index(self.num_objects, atom)
    }

    fn atoms(&self, m: usize) -> Vec<Atom> {
        let mut out = Vec::with_capacity(self.atom_count(m));
        out.extend((0..self.num_nullary).map(Atom::Nullary));
        for var in 0..m {
            out.extend((0..self.num_unary).map(|pred| Atom::Unary { var, pred }));
        }
        for subj in 0..m {
            for obj in (0..m).filter(|&o| o != subj) {
                out.extend((0..self.num_binary).map(|pred| Atom::Binary { subj, obj, pred }));
            }
        }
        out
    }

    /// Template atoms in layout order.
    pub fn template_layout(&self) -> Vec<Atom> {
        self.atoms(self.num_vars)
    }

    /// Ground atoms in layout order.
    pub fn ground_layout(&self) -> Vec<Atom> {
        self.atoms(self.num_objects)
    }

    /// Mask over ground atoms that are edges (unary or binary), i.e. not nullary.
    pub fn is_edge(&self, ground_index: usize) -> bool {
        ground_index >= self.num_nullary
    }
}

/// One labelled graph: a bipolar vector over all ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroundExample {
    pub atoms: Vec<i8>,
    pub label: bool,
}

impl GroundExample {
    pub fn new(atoms: Vec<i8>, label: bool) -> Result<Self> {
        if let Some(index) = atoms.iter().position(|a| *a != 1 && *a != -1) {
            return Err(Error::NotBipolar {
                index,
                value: atoms[index] as i64,
            });
        }
        Ok(Self { atoms, label })
    }

    pub fn check_shape(&self, sig: &PredicateSignature) -> Result<()> {
        if self.atoms.len() != sig.ground_atoms() {
            return Err(Error::Shape {
                what: "ground atoms",
                expected: sig.ground_atoms(),
                actual: self.atoms.len(),
            });
        }
        Ok(())
    }

    pub fn is_true(&self, ground_index: usize) -> bool {
        self.atoms[ground_index] > 0
    }
}
