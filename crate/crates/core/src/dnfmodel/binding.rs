use itertools::Itertools;

use crate::error::{Error, Result};
use crate::signature::{GroundExample, PredicateSignature};

/// Injective assignment of variables `0..V` to objects `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(Vec<usize>);

impl Binding {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if !assignment.iter().all_unique() {
            return Err(Error::InvalidSignature(format!(
                "binding {assignment:?} is not injective"
            )));
        }
        Ok(Self(assignment))
    }

    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// All `n!/(n-V)!` injective bindings in lexicographic order.
pub fn enumerate_bindings(num_objects: usize, num_vars: usize) -> Result<Vec<Binding>> {
    if num_vars > num_objects {
        return Err(Error::InvalidSignature(format!(
            "{num_vars} variables exceed {num_objects} objects"
        )));
    }
    if num_vars == 0 {
        return Ok(vec![Binding(Vec::new())]);
    }
    Ok((0..num_objects)
        .permutations(num_vars)
        .map(Binding)
        .collect())
}

/// Ground index feeding each template slot under one binding.
fn gather_indices(b: &Binding, sig: &PredicateSignature) -> Vec<usize> {
    sig.template_layout()
        .iter()
        .map(|atom| {
            sig.ground_index(&atom.ground(b.assignment()))
                .expect("template atoms ground to valid atoms under an injective binding")
        })
        .collect()
}

/// Template-ordered view of a graph under one binding.
pub fn ground_gather(ex: &GroundExample, b: &Binding, sig: &PredicateSignature) -> Result<Vec<f64>> {
    ex.check_shape(sig)?;
    if b.assignment().len() != sig.num_vars {
        return Err(Error::Shape {
            what: "binding",
            expected: sig.num_vars,
            actual: b.assignment().len(),
        });
    }
    if let Some(&o) = b.assignment().iter().find(|&&o| o >= sig.num_objects) {
        return Err(Error::OutOfRange {
            kind: "object",
            index: o,
            limit: sig.num_objects,
        });
    }
    Ok(gather_indices(b, sig)
        .into_iter()
        .map(|i| ex.atoms[i] as f64)
        .collect())
}

/// Precomputed gather indices for every binding of a signature.
#[derive(Debug, Clone)]
pub struct GatherTable {
    sig: PredicateSignature,
    num_bindings: usize,
    width: usize,
    idx: Vec<u32>,
}

impl GatherTable {
    pub fn new(sig: &PredicateSignature) -> Result<Self> {
        sig.validate()?;
        let bindings = enumerate_bindings(sig.num_objects, sig.num_vars)?;
        let width = sig.template_atoms();
        let mut idx = Vec::with_capacity(bindings.len() * width);
        for b in &bindings {
            idx.extend(gather_indices(b, sig).into_iter().map(|i| i as u32));
        }
        Ok(Self {
            sig: *sig,
            num_bindings: bindings.len(),
            width,
            idx,
        })
    }

    pub fn signature(&self) -> &PredicateSignature {
        &self.sig
    }

    pub fn num_bindings(&self) -> usize {
        self.num_bindings
    }

    #[inline]
    pub(crate) fn row(&self, binding: usize) -> &[u32] {
        &self.idx[binding * self.width..(binding + 1) * self.width]
    }
}
