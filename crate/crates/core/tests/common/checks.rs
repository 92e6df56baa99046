//! Suites shared by the focused test targets and the acceptance run. Each
//! returns a report; callers decide what to assert or print.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use dnfforge_core::dnfmodel::{dnf_backward, dnf_forward, extract_rules, DnfModel, GatherTable};
use dnfforge_core::graphgen::{generate_dataset, sample_hypothesis, Difficulty, SplitSizes};
use dnfforge_core::rulelang::Grounder;
use dnfforge_core::semisymbolic::{sl_backward, sl_forward, GateSelector, SlWeights, TruthValue};
use dnfforge_core::{Error, GroundExample, PredicateSignature};

use super::{all_inputs, oracle_evaluate};

pub const FD_STEP: f64 = 1e-4;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Denominator floor so that two tiny gradients do not blow up the ratio.
pub const FD_FLOOR: f64 = 1e-8;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(FD_FLOOR)
}

#[derive(Debug, Default)]
pub struct GradientReport {
    pub configs: usize,
    pub components: usize,
    pub max_rel_err: f64,
}

/// Top two magnitudes differ and nothing sits near zero.
fn clear_of_kinks(w: &[f64], margin: f64) -> bool {
    let mut mags: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags.iter().all(|&m| m > margin) && (mags.len() < 2 || mags[0] - mags[1] > margin)
}

pub fn sl_gradient_suite(configs: usize, seed: u64) -> GradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.7).unwrap();
    let mut rep = GradientReport::default();
    while rep.configs < configs {
        let n = rng.random_range(1..=12);
        let w: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        if !clear_of_kinks(&w, 1e-2) {
            continue;
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.95..0.95)).collect();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let delta = GateSelector::new(sign * rng.random_range(0.05..=1.0)).unwrap();
        let upstream = rng.random_range(-2.0..2.0);
        let f = |x: &[f64], w: &[f64]| {
            let xs: Vec<TruthValue> = x.iter().map(|&v| TruthValue::new(v)).collect();
            upstream * sl_forward(&xs, &SlWeights::new(w.to_vec()).unwrap(), delta).unwrap().value()
        };
        let xs: Vec<TruthValue> = x.iter().map(|&v| TruthValue::new(v)).collect();
        let g = sl_backward(&xs, &SlWeights::new(w.clone()).unwrap(), delta, upstream).unwrap();
        for i in 0..n {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += FD_STEP;
            xm[i] -= FD_STEP;
            let num = (f(&xp, &w) - f(&xm, &w)) / (2.0 * FD_STEP);
            rep.max_rel_err = rep.max_rel_err.max(rel_err(g.grad_x[i], num));
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[i] += FD_STEP;
            wm[i] -= FD_STEP;
            let num = (f(&x, &wp) - f(&x, &wm)) / (2.0 * FD_STEP);
            rep.max_rel_err = rep.max_rel_err.max(rel_err(g.grad_w[i], num));
            rep.components += 2;
        }
        rep.configs += 1;
    }
    rep
}

pub fn dnf_gradient_suite(configs: usize, seed: u64) -> GradientReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = Difficulty::Easy.signature();
    let table = GatherTable::new(&sig).unwrap();
    let nb = table.num_bindings();
    let mut rep = GradientReport::default();
    while rep.configs < configs {
        let gate = rng.random_range(0.1..=1.0);
        let m = DnfModel::random(&sig, 0.5, gate, &mut rng).unwrap();
        let rows_ok = (0..sig.num_rules).all(|r| clear_of_kinks(m.conj_row(r), 1e-2));
        if !rows_ok || !clear_of_kinks(&m.disj_w, 1e-2) {
            continue;
        }
        let atoms: Vec<i8> = (0..sig.ground_atoms()).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let ex = GroundExample::new(atoms, false).unwrap();
        let out = dnf_forward(&ex, &m).unwrap();
        let untied = (0..sig.num_rules).all(|r| {
            let mut s: Vec<f64> = (0..nb).map(|b| out.binding_score(r, b)).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s[0] - s[1] > 1e-2
        });
        if !untied {
            continue;
        }
        let upstream = rng.random_range(-2.0..2.0);
        let g = dnf_backward(&ex, &m, upstream).unwrap().flatten();
        for (i, &analytic) in g.iter().enumerate() {
            let (mut mp, mut mm) = (m.clone(), m.clone());
            mp.set_weight(i, m.weight(i) + FD_STEP);
            mm.set_weight(i, m.weight(i) - FD_STEP);
            let fp = upstream * dnf_forward(&ex, &mp).unwrap().t_score;
            let fm = upstream * dnf_forward(&ex, &mm).unwrap().t_score;
            let num = (fp - fm) / (2.0 * FD_STEP);
            rep.max_rel_err = rep.max_rel_err.max(rel_err(analytic, num));
            rep.components += 1;
        }
        rep.configs += 1;
    }
    rep
}

#[derive(Debug, Default)]
pub struct SemanticsReport {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SemanticsReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn tv(v: &[i8]) -> Vec<TruthValue> {
    v.iter().map(|&b| TruthValue::new(b as f64)).collect()
}

/// Saturated AND/OR against boolean truth tables, plus the degenerate cases.
pub fn semantics_suite(samples_per_n: usize, seed: u64) -> SemanticsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SemanticsReport::default();
    for n in 1..=10usize {
        for _ in 0..samples_per_n {
            // Weight signs in {-1, 0, +1}, at least one non-zero.
            let signs: Vec<i8> = loop {
                let s: Vec<i8> = (0..n).map(|_| rng.random_range(-1..=1)).collect();
                if s.iter().any(|&v| v != 0) {
                    break s;
                }
            };
            let x: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            let w = SlWeights::new(signs.iter().map(|&s| 6.0 * s as f64).collect()).unwrap();
            let lits = signs.iter().zip(&x).filter(|(s, _)| **s != 0);
            let want_and = lits.clone().all(|(s, xi)| s == xi);
            let want_or = lits.clone().any(|(s, xi)| s == xi);
            let and = sl_forward(&tv(&x), &w, GateSelector::CONJUNCTIVE).unwrap();
            let or = sl_forward(&tv(&x), &w, GateSelector::DISJUNCTIVE).unwrap();
            rep.check(and.is_true() == want_and && and.value().abs() > 0.99, || {
                format!("AND w={signs:?} x={x:?} -> {}", and.value())
            });
            rep.check(or.is_true() == want_or && or.value().abs() > 0.99, || {
                format!("OR w={signs:?} x={x:?} -> {}", or.value())
            });
        }
    }

    let empty = SlWeights::new(vec![]).unwrap();
    for d in [GateSelector::CONJUNCTIVE, GateSelector::DISJUNCTIVE] {
        let y = sl_forward(&[], &empty, d).unwrap().value();
        rep.check(y == 0.0, || format!("zero fan-in gave {y}"));
        for v in [-1.0, 0.0, 0.3, 1.0] {
            let y = sl_forward(&[TruthValue::new(v)], &SlWeights::new(vec![6.0]).unwrap(), d)
                .unwrap()
                .value();
            rep.check(y == (6.0 * v).tanh(), || format!("singleton {v} gave {y}"));
        }
    }
    let unknown = sl_forward(
        &[TruthValue::UNKNOWN, TruthValue::UNKNOWN],
        &SlWeights::new(vec![6.0, 6.0]).unwrap(),
        GateSelector::CONJUNCTIVE,
    )
    .unwrap()
    .value();
    rep.check(unknown < 0.0, || format!("all-unknown conjunction gave {unknown}"));

    // OR(x) = -AND(-x) for the same weights.
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let w = SlWeights::new((0..n).map(|_| rng.random_range(-6.0..6.0)).collect()).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let pos: Vec<TruthValue> = x.iter().map(|&v| TruthValue::new(v)).collect();
        let neg: Vec<TruthValue> = x.iter().map(|&v| TruthValue::new(-v)).collect();
        let or = sl_forward(&pos, &w, GateSelector::DISJUNCTIVE).unwrap().value();
        let and = sl_forward(&neg, &w, GateSelector::CONJUNCTIVE).unwrap().value();
        rep.check((or + and).abs() < 1e-12, || format!("negation symmetry {or} vs {and}"));
    }
    rep
}

#[derive(Debug, Default)]
pub struct EquivalenceReport {
    pub pairs: usize,
    pub models: usize,
    pub degenerate_rejected: usize,
    pub oracle_pairs: usize,
    pub disagreements: Vec<String>,
}

fn decode_base3(mut code: u64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let d = code % 3;
            code /= 3;
            [0.0, 6.0, -6.0][d as usize]
        })
        .collect()
}

fn has_degenerate_disjunct(m: &DnfModel) -> bool {
    (0..m.num_rules()).any(|r| m.disj_w[r] != 0.0 && m.conj_row(r).iter().all(|&w| w == 0.0))
}

fn check_model(m: &DnfModel, inputs: &[Vec<i8>], oracle_every: usize, rep: &mut EquivalenceReport) {
    let sig = m.signature;
    rep.models += 1;
    if has_degenerate_disjunct(m) {
        match extract_rules(m, &sig) {
            Err(Error::DegenerateRule { .. }) => rep.degenerate_rejected += 1,
            other => rep.disagreements.push(format!("degenerate model not rejected: {other:?}")),
        }
        return;
    }
    let rules = extract_rules(m, &sig).expect("thresholded model extracts");
    let grounder = Grounder::new(&rules, &sig).unwrap();
    let table = GatherTable::new(&sig).unwrap();
    for (i, atoms) in inputs.iter().enumerate() {
        let net = table.forward(atoms, m).unwrap().t_score > 0.0;
        let sym = grounder.evaluate_atoms(atoms);
        rep.pairs += 1;
        if net != sym {
            rep.disagreements.push(format!("{rules} on {atoms:?}: network {net}, rules {sym}"));
        }
        if i % oracle_every == 0 {
            rep.oracle_pairs += 1;
            let oracle = oracle_evaluate(&rules, atoms, &sig);
            if oracle != sym {
                rep.disagreements.push(format!("{rules} on {atoms:?}: oracle {oracle}, rules {sym}"));
            }
        }
    }
}

/// Network sign versus extracted rules on micro signatures: every
/// thresholded model where that is feasible, random ones otherwise.
pub fn equivalence_suite(seed: u64) -> EquivalenceReport {
    let mut rep = EquivalenceReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (N0, N1, N2, objects, vars, rules)
    let exhaustive = [(1, 1, 1, 2, 2, 1), (1, 1, 1, 3, 2, 1), (1, 2, 0, 3, 1, 2), (2, 1, 0, 2, 1, 2)];
    for (n0, n1, n2, n, v, r) in exhaustive {
        let sig = PredicateSignature::new(n0, n1, n2, n, v, r).unwrap();
        let a = sig.template_atoms();
        let inputs: Vec<Vec<i8>> = all_inputs(sig.ground_atoms()).collect();
        let total = 3u64.pow((r * a + r) as u32);
        for code in 0..total {
            let w = decode_base3(code, r * a + r);
            let m = DnfModel {
                signature: sig,
                conj_w: w[..r * a].to_vec(),
                disj_w: w[r * a..].to_vec(),
                gate: 1.0,
            };
            check_model(&m, &inputs, 97, &mut rep);
        }
    }
    let sampled = [(2, 2, 2, 3, 2, 2), (2, 2, 1, 3, 2, 2), (1, 2, 2, 2, 2, 2)];
    for (n0, n1, n2, n, v, r) in sampled {
        let sig = PredicateSignature::new(n0, n1, n2, n, v, r).unwrap();
        let a = sig.template_atoms();
        let d = sig.ground_atoms();
        for _ in 0..500 {
            // Sparse rows so that rules fire on a useful share of inputs.
            let mut pick = || match rng.random_range(0..6) {
                0 => 6.0,
                1 => -6.0,
                _ => 0.0,
            };
            let conj_w: Vec<f64> = (0..r * a).map(|_| pick()).collect();
            let disj_w: Vec<f64> = (0..r).map(|_| [6.0, -6.0, 0.0][rng.random_range(0..3)]).collect();
            let m = DnfModel {
                signature: sig,
                conj_w,
                disj_w,
                gate: 1.0,
            };
            let inputs: Vec<Vec<i8>> = if d <= 10 {
                all_inputs(d).collect()
            } else {
                (0..256).map(|_| (0..d).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()).collect()
            };
            check_model(&m, &inputs, 7, &mut rep);
        }
    }
    rep
}

#[derive(Debug)]
pub struct BodyLengthReport {
    pub difficulty: Difficulty,
    pub rules: usize,
    pub mean: f64,
    pub expected: f64,
}

impl BodyLengthReport {
    pub fn rel_dev(&self) -> f64 {
        (self.mean - self.expected).abs() / self.expected
    }
}

pub const BODY_LENGTH_TOLERANCE: f64 = 0.10;

pub fn body_lengths(diff: Difficulty, hypotheses: u64) -> BodyLengthReport {
    let a = diff.signature().template_atoms();
    let mut total = 0usize;
    let mut rules = 0usize;
    for seed in 0..hypotheses {
        for r in &sample_hypothesis(diff, seed).rules {
            total += r.body.len();
            rules += 1;
        }
    }
    BodyLengthReport {
        difficulty: diff,
        rules,
        mean: total as f64 / rules as f64,
        expected: 2.0 * a as f64 / 3.0,
    }
}

#[derive(Debug)]
pub struct SplitReport {
    pub sizes: [usize; 3],
    pub positives: [usize; 3],
    pub duplicates: usize,
    pub deterministic: bool,
    pub label_mismatches: [usize; 3],
}

pub fn split_properties(diff: Difficulty, seed: u64) -> SplitReport {
    let a = generate_dataset(diff, SplitSizes::default(), 0.0, seed).unwrap();
    let b = generate_dataset(diff, SplitSizes::default(), 0.0, seed).unwrap();
    let mut seen = HashSet::new();
    let mut duplicates = 0;
    let mut sizes = [0; 3];
    let mut positives = [0; 3];
    for (i, (_, split)) in a.splits().iter().enumerate() {
        sizes[i] = split.len();
        positives[i] = split.iter().filter(|e| e.label).count();
        for e in split.iter() {
            if !seen.insert(e.atoms.clone()) {
                duplicates += 1;
            }
        }
    }
    // Labels recomputed by the independent oracle, not the library grounder.
    let mut label_mismatches = [0; 3];
    for (i, (_, split)) in a.splits().iter().enumerate() {
        label_mismatches[i] = split
            .iter()
            .filter(|e| oracle_evaluate(&a.hypothesis, &e.atoms, &a.signature) != e.label)
            .count();
    }
    SplitReport {
        sizes,
        positives,
        duplicates,
        deterministic: a == b,
        label_mismatches,
    }
}
