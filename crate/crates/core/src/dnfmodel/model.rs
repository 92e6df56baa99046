use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::binding::GatherTable;
use crate::error::{Error, Result};
use crate::semisymbolic::{accumulate_bias_grad, bias_raw, SATURATED_WEIGHT};
use crate::signature::{GroundExample, PredicateSignature};

/// A conjunctive layer (one row per rule over the template atoms) followed
/// by a disjunctive unit over the rules.
///
/// Serialized as `{signature, conj_w, disj_w, gate}` with `conj_w` flattened
/// row-major (`R x A`). `gate` is the shared magnitude `|delta|`; the
/// conjunctive layer uses `+gate`, the disjunctive unit `-gate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnfModel {
    pub signature: PredicateSignature,
    pub conj_w: Vec<f64>,
    pub disj_w: Vec<f64>,
    pub gate: f64,
}

impl DnfModel {
    pub fn zeros(sig: &PredicateSignature, gate: f64) -> Result<Self> {
        let m = Self {
            signature: *sig,
            conj_w: vec![0.0; sig.num_rules * sig.template_atoms()],
            disj_w: vec![0.0; sig.num_rules],
            gate,
        };
        m.validate()?;
        Ok(m)
    }

    /// Weights drawn from `N(0, std)`.
    pub fn random<R: Rng + ?Sized>(sig: &PredicateSignature, std: f64, gate: f64, rng: &mut R) -> Result<Self> {
        let normal = Normal::new(0.0, std).map_err(|e| Error::Config(e.to_string()))?;
        let mut m = Self::zeros(sig, gate)?;
        for w in m.conj_w.iter_mut().chain(m.disj_w.iter_mut()) {
            *w = normal.sample(rng);
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let sig = &self.signature;
        sig.validate()?;
        let expected = sig.num_rules * sig.template_atoms();
        if self.conj_w.len() != expected {
            return Err(Error::Shape {
                what: "conjunctive weights",
                expected,
                actual: self.conj_w.len(),
            });
        }
        if self.disj_w.len() != sig.num_rules {
            return Err(Error::Shape {
                what: "disjunctive weights",
                expected: sig.num_rules,
                actual: self.disj_w.len(),
            });
        }
        if let Some((index, value)) = self.weights().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        if !(0.0..=1.0).contains(&self.gate) {
            return Err(Error::Config(format!("gate magnitude {} outside [0, 1]", self.gate)));
        }
        Ok(())
    }

    pub fn num_rules(&self) -> usize {
        self.signature.num_rules
    }

    pub fn conj_row(&self, rule: usize) -> &[f64] {
        let a = self.signature.template_atoms();
        &self.conj_w[rule * a..(rule + 1) * a]
    }

    /// Total number of weights, conjunctive first.
    pub fn weight_count(&self) -> usize {
        self.conj_w.len() + self.disj_w.len()
    }

    /// All weights in flat order: conjunctive row-major, then disjunctive.
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.conj_w.iter().chain(&self.disj_w).copied()
    }

    pub fn weight(&self, index: usize) -> f64 {
        let c = self.conj_w.len();
        if index < c {
            self.conj_w[index]
        } else {
            self.disj_w[index - c]
        }
    }

    pub fn set_weight(&mut self, index: usize, value: f64) {
        let c = self.conj_w.len();
        if index < c {
            self.conj_w[index] = value;
        } else {
            self.disj_w[index - c] = value;
        }
    }

    pub fn flat_weights(&self) -> Vec<f64> {
        self.weights().collect()
    }

    pub fn set_flat_weights(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.weight_count() {
            return Err(Error::Shape {
                what: "flat weights",
                expected: self.weight_count(),
                actual: flat.len(),
            });
        }
        let (c, d) = flat.split_at(self.conj_w.len());
        self.conj_w.copy_from_slice(c);
        self.disj_w.copy_from_slice(d);
        Ok(())
    }

    /// True when every weight is exactly `-6`, `0` or `+6`.
    pub fn is_thresholded(&self) -> bool {
        self.first_unthresholded().is_none()
    }

    /// First weight outside {-6, 0, 6}, with its value.
    pub fn first_unthresholded(&self) -> Option<(usize, f64)> {
        self.weights()
            .enumerate()
            .find(|(_, w)| *w != 0.0 && w.abs() != SATURATED_WEIGHT)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

/// Everything the forward pass computes for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DnfOutput {
    pub t_score: f64,
    pub rule_scores: Vec<f64>,
    /// `R x bindings`, row-major.
    pub binding_scores: Vec<f64>,
    /// Winning binding per rule (lowest index on ties).
    pub argmax: Vec<usize>,
}

impl DnfOutput {
    pub fn binding_score(&self, rule: usize, binding: usize) -> f64 {
        let nb = self.binding_scores.len() / self.rule_scores.len().max(1);
        self.binding_scores[rule * nb + binding]
    }
}

/// Gradient with the same shape as a model's weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DnfGradient {
    pub conj: Vec<f64>,
    pub disj: Vec<f64>,
}

impl DnfGradient {
    pub fn zeros_like(m: &DnfModel) -> Self {
        Self {
            conj: vec![0.0; m.conj_w.len()],
            disj: vec![0.0; m.disj_w.len()],
        }
    }

    pub fn add_assign(&mut self, other: &DnfGradient) {
        for (a, b) in self.conj.iter_mut().zip(&other.conj) {
            *a += b;
        }
        for (a, b) in self.disj.iter_mut().zip(&other.disj) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.conj.iter_mut().chain(self.disj.iter_mut()) {
            *v *= c;
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.conj.iter().chain(&self.disj).copied().collect()
    }
}

impl GatherTable {
    fn check(&self, atoms: &[i8], m: &DnfModel) -> Result<()> {
        if m.signature != *self.signature() {
            return Err(Error::InvalidSignature(
                "model and grounding signatures differ".into(),
            ));
        }
        if atoms.len() != self.signature().ground_atoms() {
            return Err(Error::Shape {
                what: "ground atoms",
                expected: self.signature().ground_atoms(),
                actual: atoms.len(),
            });
        }
        Ok(())
    }

    /// Forward pass without shape checks; callers guarantee consistency.
    pub(crate) fn forward_unchecked(&self, atoms: &[i8], m: &DnfModel) -> DnfOutput {
        let nr = m.num_rules();
        let nb = self.num_bindings();
        let mut binding_scores = Vec::with_capacity(nr * nb);
        let mut rule_scores = Vec::with_capacity(nr);
        let mut argmax = Vec::with_capacity(nr);
        for r in 0..nr {
            let row = m.conj_row(r);
            let bias = bias_raw(row, m.gate);
            let mut best = (0usize, f64::NEG_INFINITY);
            for b in 0..nb {
                let pre: f64 = row
                    .iter()
                    .zip(self.row(b))
                    .map(|(w, &i)| w * atoms[i as usize] as f64)
                    .sum::<f64>()
                    + bias;
                let s = pre.tanh();
                if s > best.1 {
                    best = (b, s);
                }
                binding_scores.push(s);
            }
            argmax.push(best.0);
            rule_scores.push(best.1);
        }
        let pre: f64 = m
            .disj_w
            .iter()
            .zip(&rule_scores)
            .map(|(w, s)| w * s)
            .sum::<f64>()
            + bias_raw(&m.disj_w, -m.gate);
        DnfOutput {
            t_score: pre.tanh(),
            rule_scores,
            binding_scores,
            argmax,
        }
    }

    pub fn forward(&self, atoms: &[i8], m: &DnfModel) -> Result<DnfOutput> {
        self.check(atoms, m)?;
        Ok(self.forward_unchecked(atoms, m))
    }

    /// Accumulates `upstream * d t_score / d weights` into `grad` and
    /// returns the forward output.
    pub(crate) fn backward_unchecked(
        &self,
        atoms: &[i8],
        m: &DnfModel,
        upstream: f64,
        grad: &mut DnfGradient,
    ) -> DnfOutput {
        let out = self.forward_unchecked(atoms, m);
        let g = upstream * (1.0 - out.t_score * out.t_score);
        for (gd, s) in grad.disj.iter_mut().zip(&out.rule_scores) {
            *gd += g * s;
        }
        accumulate_bias_grad(&m.disj_w, -m.gate, g, &mut grad.disj);

        let a = m.signature.template_atoms();
        for r in 0..m.num_rules() {
            let s = out.rule_scores[r];
            let h = g * m.disj_w[r] * (1.0 - s * s);
            if h == 0.0 {
                continue;
            }
            let row = m.conj_row(r);
            let grad_row = &mut grad.conj[r * a..(r + 1) * a];
            for (gw, &i) in grad_row.iter_mut().zip(self.row(out.argmax[r])) {
                *gw += h * atoms[i as usize] as f64;
            }
            accumulate_bias_grad(row, m.gate, h, grad_row);
        }
        out
    }

    pub fn backward(&self, atoms: &[i8], m: &DnfModel, upstream: f64) -> Result<DnfGradient> {
        self.check(atoms, m)?;
        let mut grad = DnfGradient::zeros_like(m);
        self.backward_unchecked(atoms, m, upstream, &mut grad);
        Ok(grad)
    }
}

/// Forward pass for one graph.
pub fn dnf_forward(ex: &GroundExample, m: &DnfModel) -> Result<DnfOutput> {
    m.validate()?;
    GatherTable::new(&m.signature)?.forward(&ex.atoms, m)
}

/// Gradient of `upstream * t_score` with respect to every weight.
///
/// The existential max passes gradient to its winning binding only.
pub fn dnf_backward(ex: &GroundExample, m: &DnfModel, upstream: f64) -> Result<DnfGradient> {
    m.validate()?;
    GatherTable::new(&m.signature)?.backward(&ex.atoms, m, upstream)
}
