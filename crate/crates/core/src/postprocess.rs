//! Prune & threshold: turn a trained model into one with weights in
//! `{-6, 0, +6}` while watching validation accuracy.
//!
//! 1. prune: try zeroing each weight once, keep the zero if accuracy drops
//!    by at most `epsilon`;
//! 2. sweep 100 thresholds between the smallest non-zero and the largest
//!    magnitude, keep the most accurate (larger wins ties);
//! 3. snap survivors to `6 * sign(w)`;
//! 4. prune again, repeating passes until nothing changes.
//!
//! Between 3 and 4, and after 4, disjuncts whose conjunction became empty
//! are switched off since they have no rule reading.

use std::fmt;

use rayon::prelude::*;

use crate::dnfmodel::{DnfModel, GatherTable};
use crate::error::{Error, Result};
use crate::semisymbolic::SATURATED_WEIGHT;
use crate::signature::GroundExample;
use crate::trainer::accuracy_with;

pub const DEFAULT_EPSILON: f64 = 0.001;
pub const SWEEP_CANDIDATES: usize = 100;

// Accuracies are ratios of counts; absorb rounding in `before - after`.
const ACC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Prune,
    Threshold,
    Sanitize,
    Reprune,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Prune => "prune",
            Stage::Threshold => "threshold",
            Stage::Sanitize => "sanitize",
            Stage::Reprune => "reprune",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Zeroed,
    Kept,
    /// Weight was already zero.
    Skipped,
    Candidate,
    Selected,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Zeroed => "zeroed",
            Action::Kept => "kept",
            Action::Skipped => "skipped",
            Action::Candidate => "candidate",
            Action::Selected => "selected",
        })
    }
}

/// One audit row. For prune stages `index` is the flat weight index and
/// `value` the weight tried; for the sweep, the candidate index and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub stage: Stage,
    pub index: usize,
    pub value: f64,
    pub action: Action,
    pub acc_before: f64,
    pub acc_after: f64,
}

impl AuditEntry {
    pub const CSV_HEADER: &'static str = "stage,index,value,action,acc_before,acc_after";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.stage, self.index, self.value, self.action, self.acc_before, self.acc_after
        )
    }
}

struct Validator<'a> {
    table: GatherTable,
    examples: &'a [GroundExample],
}

impl<'a> Validator<'a> {
    fn new(m: &DnfModel, examples: &'a [GroundExample]) -> Result<Self> {
        m.validate()?;
        if examples.is_empty() {
            return Err(Error::Empty("validation set"));
        }
        let table = GatherTable::new(&m.signature)?;
        accuracy_with(&table, m, examples)?;
        Ok(Self { table, examples })
    }

    fn accuracy(&self, m: &DnfModel) -> f64 {
        accuracy_with(&self.table, m, self.examples).expect("validated on construction")
    }
}

fn prune_pass(m: &mut DnfModel, v: &Validator, epsilon: f64, stage: Stage, audit: &mut Vec<AuditEntry>) -> usize {
    let mut base = v.accuracy(m);
    let mut zeroed = 0;
    for i in 0..m.weight_count() {
        let w = m.weight(i);
        if w == 0.0 {
            audit.push(AuditEntry { stage, index: i, value: w, action: Action::Skipped, acc_before: base, acc_after: base });
            continue;
        }
        m.set_weight(i, 0.0);
        let acc = v.accuracy(m);
        let action = if base - acc <= epsilon + ACC_SLACK {
            zeroed += 1;
            Action::Zeroed
        } else {
            m.set_weight(i, w);
            Action::Kept
        };
        audit.push(AuditEntry { stage, index: i, value: w, action, acc_before: base, acc_after: acc });
        if action == Action::Zeroed {
            base = acc;
        }
    }
    zeroed
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Config(format!("epsilon must be non-negative, got {epsilon}")));
    }
    Ok(())
}

/// Single greedy pass over all weights (conjunctive row-major, then
/// disjunctive), returning the pruned model and one audit row per weight.
pub fn prune(m: &DnfModel, val: &[GroundExample], epsilon: f64) -> Result<(DnfModel, Vec<AuditEntry>)> {
    check_epsilon(epsilon)?;
    let v = Validator::new(m, val)?;
    let mut out = m.clone();
    let mut audit = Vec::new();
    prune_pass(&mut out, &v, epsilon, Stage::Prune, &mut audit);
    Ok((out, audit))
}

/// `|w| < threshold -> 0`, otherwise `6 * sign(w)`. The result runs at full
/// gate strength.
pub fn threshold_weights(m: &DnfModel, threshold: f64) -> Result<DnfModel> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let snap = |w: f64| if w.abs() < threshold { 0.0 } else { SATURATED_WEIGHT * w.signum() };
    let mut out = m.clone();
    for w in out.conj_w.iter_mut().chain(out.disj_w.iter_mut()) {
        *w = snap(*w);
    }
    out.gate = 1.0;
    Ok(out)
}

fn sweep(m: &DnfModel, v: &Validator) -> Result<(f64, Vec<(f64, f64)>)> {
    let mags: Vec<f64> = m.weights().map(f64::abs).filter(|a| *a > 0.0).collect();
    if mags.is_empty() {
        return Err(Error::Empty("set of non-zero weights"));
    }
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    let step = (hi - lo) / (SWEEP_CANDIDATES - 1) as f64;
    let candidates: Vec<f64> = (0..SWEEP_CANDIDATES)
        .map(|k| if k == SWEEP_CANDIDATES - 1 { hi } else { lo + step * k as f64 })
        .collect();
    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&c| threshold_weights(m, c).map(|t| (c, v.accuracy(&t))))
        .collect::<Result<_>>()?;
    let mut best = scored[0];
    for &(c, acc) in &scored[1..] {
        if acc >= best.1 {
            best = (c, acc);
        }
    }
    Ok((best.0, scored))
}

/// Best threshold among 100 evenly spaced candidates over
/// `[min non-zero |w|, max |w|]`.
pub fn pick_threshold(m: &DnfModel, val: &[GroundExample], epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let v = Validator::new(m, val)?;
    sweep(m, &v).map(|(t, _)| t)
}

fn sanitize(m: &mut DnfModel, v: &Validator, audit: &mut Vec<AuditEntry>) {
    let offset = m.conj_w.len();
    for r in 0..m.num_rules() {
        if m.disj_w[r] != 0.0 && m.conj_row(r).iter().all(|w| *w == 0.0) {
            let before = v.accuracy(m);
            let w = m.disj_w[r];
            m.disj_w[r] = 0.0;
            audit.push(AuditEntry {
                stage: Stage::Sanitize,
                index: offset + r,
                value: w,
                action: Action::Zeroed,
                acc_before: before,
                acc_after: v.accuracy(m),
            });
        }
    }
}

/// Result of the full prune & threshold pipeline.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub model: DnfModel,
    pub threshold: f64,
    pub audit: Vec<AuditEntry>,
}

/// Prune, threshold, prune again. The output satisfies
/// [`crate::dnfmodel::extract_rules`]'s preconditions.
pub fn prune_threshold_pipeline(m: &DnfModel, val: &[GroundExample], epsilon: f64) -> Result<Pipeline> {
    check_epsilon(epsilon)?;
    let v = Validator::new(m, val)?;
    let mut audit = Vec::new();

    let mut model = m.clone();
    prune_pass(&mut model, &v, epsilon, Stage::Prune, &mut audit);

    if model.weights().all(|w| w == 0.0) {
        // Nothing left to threshold; the zero model is already symbolic.
        model.gate = 1.0;
        return Ok(Pipeline { model, threshold: SATURATED_WEIGHT, audit });
    }
    let before = v.accuracy(&model);
    let (threshold, scored) = sweep(&model, &v)?;
    for (k, &(c, acc)) in scored.iter().enumerate() {
        let action = if c == threshold { Action::Selected } else { Action::Candidate };
        audit.push(AuditEntry { stage: Stage::Threshold, index: k, value: c, action, acc_before: before, acc_after: acc });
    }
    model = threshold_weights(&model, threshold)?;
    sanitize(&mut model, &v, &mut audit);

    while prune_pass(&mut model, &v, epsilon, Stage::Reprune, &mut audit) > 0 {}
    sanitize(&mut model, &v, &mut audit);
    Ok(Pipeline { model, threshold, audit })
}
