//! Synthetic subgraph-set-isomorphism data.
//!
//! A hidden rule set plays the role of the target graphs: each rule body is
//! a small pattern over variables, and a graph is positive iff some rule body
//! embeds into it injectively. Graphs are bipolar vectors over the ground
//! atoms of a [`PredicateSignature`].

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dnfmodel::enumerate_bindings;
use crate::error::{Error, Result};
use crate::rulelang::{format_ruleset, parse_ruleset, Atom, Grounder, Head, Literal, Rule, RuleSet};
use crate::signature::{GroundExample, PredicateSignature};

/// Hypotheses tried before generation gives up.
const MAX_HYPOTHESES: usize = 100;

/// Share of negative candidates drawn as near misses rather than uniformly.
const NEAR_MISS_SHARE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    /// `(objects, nullary, unary, binary, variables, max rules)`.
    pub fn parameters(self) -> (usize, usize, usize, usize, usize, usize) {
        match self {
            Difficulty::Easy => (3, 2, 2, 2, 2, 3),
            Difficulty::Medium => (4, 4, 5, 6, 3, 4),
            Difficulty::Hard => (4, 6, 7, 8, 3, 5),
        }
    }

    pub fn max_rules(self) -> usize {
        self.parameters().5
    }

    /// Signature with one model rule per allowed hypothesis rule.
    pub fn signature(self) -> PredicateSignature {
        let (n, n0, n1, n2, v, r) = self.parameters();
        PredicateSignature {
            num_nullary: n0,
            num_unary: n1,
            num_binary: n2,
            num_objects: n,
            num_vars: v,
            num_rules: r,
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::Config(format!("unknown difficulty `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 2000,
            validation: 1000,
            test: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub difficulty: Difficulty,
    pub signature: PredicateSignature,
    pub hypothesis: RuleSet,
    pub noise_prob: f64,
    pub seed: u64,
    pub train: Vec<GroundExample>,
    pub validation: Vec<GroundExample>,
    pub test: Vec<GroundExample>,
}

#[derive(Serialize, Deserialize)]
struct Splits {
    train: Vec<GroundExample>,
    validation: Vec<GroundExample>,
    test: Vec<GroundExample>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    difficulty: Difficulty,
    signature: PredicateSignature,
    hypothesis_text: String,
    noise_prob: f64,
    seed: u64,
    splits: Splits,
}

impl Dataset {
    pub fn splits(&self) -> [(&'static str, &[GroundExample]); 3] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DatasetFile {
            difficulty: self.difficulty,
            signature: self.signature,
            hypothesis_text: format_ruleset(&self.hypothesis),
            noise_prob: self.noise_prob,
            seed: self.seed,
            splits: Splits {
                train: self.train.clone(),
                validation: self.validation.clone(),
                test: self.test.clone(),
            },
        };
        serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let ds = Self {
            difficulty: file.difficulty,
            signature: file.signature,
            hypothesis: parse_ruleset(&file.hypothesis_text)?,
            noise_prob: file.noise_prob,
            seed: file.seed,
            train: file.splits.train,
            validation: file.splits.validation,
            test: file.splits.test,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        self.signature.validate()?;
        if !(0.0..=1.0).contains(&self.noise_prob) {
            return Err(Error::Config(format!("noise probability {} outside [0, 1]", self.noise_prob)));
        }
        for (_, split) in self.splits() {
            for ex in split {
                ex.check_shape(&self.signature)?;
                if let Some(index) = ex.atoms.iter().position(|a| *a != 1 && *a != -1) {
                    return Err(Error::NotBipolar {
                        index,
                        value: ex.atoms[index] as i64,
                    });
                }
            }
        }
        Grounder::new(&self.hypothesis, &self.signature).map(|_| ())
    }

    /// Examples whose stored label disagrees with the hypothesis, per split.
    pub fn label_mismatches(&self) -> Result<[usize; 3]> {
        let g = Grounder::new(&self.hypothesis, &self.signature)?;
        let count = |xs: &[GroundExample]| xs.iter().filter(|e| g.evaluate_atoms(&e.atoms) != e.label).count();
        Ok([count(&self.train), count(&self.validation), count(&self.test)])
    }
}

fn sample_hypothesis_with<R: Rng + ?Sized>(diff: Difficulty, rng: &mut R) -> RuleSet {
    let sig = diff.signature();
    let layout = sig.template_layout();
    let count = rng.random_range(1..=diff.max_rules());
    let rules = (0..count)
        .map(|_| loop {
            let body: Vec<Literal> = layout
                .iter()
                .filter_map(|atom| match rng.random_range(0..3u8) {
                    0 => Some(Literal::pos(*atom)),
                    1 => Some(Literal::neg(*atom)),
                    _ => None,
                })
                .collect();
            if !body.is_empty() {
                break Rule::new(Head::Target, body);
            }
        })
        .collect();
    RuleSet::new(rules)
}

/// Random hypothesis: each template atom is independently positive,
/// negated or absent with probability 1/3.
pub fn sample_hypothesis(diff: Difficulty, seed: u64) -> RuleSet {
    sample_hypothesis_with(diff, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn random_atoms<R: Rng + ?Sized>(sig: &PredicateSignature, rng: &mut R) -> Vec<i8> {
    (0..sig.ground_atoms())
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect()
}

/// Uniform random graph labelled by the hypothesis.
pub fn sample_example(diff: Difficulty, hypothesis: &RuleSet, seed: u64) -> Result<GroundExample> {
    let sig = diff.signature();
    let g = Grounder::new(hypothesis, &sig)?;
    let atoms = random_atoms(&sig, &mut ChaCha8Rng::seed_from_u64(seed));
    let label = g.evaluate_atoms(&atoms);
    Ok(GroundExample { atoms, label })
}

/// Uniform random graph with one hypothesis rule embedded under a random
/// binding, plus the ground indices that rule's body occupies. Only
/// `t :- body.` rules are planted; returns `None` if there are none.
fn plant_rule<R: Rng + ?Sized>(
    sig: &PredicateSignature,
    hypothesis: &RuleSet,
    bindings: &[Vec<usize>],
    rng: &mut R,
) -> Option<(Vec<i8>, Vec<usize>)> {
    let plain: Vec<&Rule> = hypothesis
        .rules
        .iter()
        .filter(|r| r.head == Head::Target && r.body.iter().all(|l| !matches!(l.atom, Atom::Aux(_))))
        .collect();
    let rule = plain.choose(rng)?;
    let binding = bindings.choose(rng)?;
    let mut atoms = random_atoms(sig, rng);
    let mut used = Vec::with_capacity(rule.body.len());
    for lit in &rule.body {
        let i = sig.ground_index(&lit.atom.ground(binding))?;
        atoms[i] = if lit.negated { -1 } else { 1 };
        used.push(i);
    }
    Some((atoms, used))
}

/// A planted rule with between one and half of its body atoms flipped.
/// Usually negative, and harder to separate from positives than a uniform
/// graph.
fn near_miss<R: Rng + ?Sized>(
    sig: &PredicateSignature,
    hypothesis: &RuleSet,
    bindings: &[Vec<usize>],
    rng: &mut R,
) -> Option<Vec<i8>> {
    let (mut atoms, used) = plant_rule(sig, hypothesis, bindings, rng)?;
    let k = rng.random_range(1..=(used.len() / 2).max(1));
    for &i in used.choose_multiple(rng, k) {
        atoms[i] = -atoms[i];
    }
    Some(atoms)
}

/// How candidates for a hypothesis are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sampling {
    /// Uniform graphs, kept or rejected by label.
    Uniform,
    /// Positives by embedding a rule, negatives uniform or near misses.
    Planted,
}

/// Uniform graphs drawn to estimate a hypothesis' positive rate.
const PILOT_DRAWS: usize = 1000;

/// Positive and negative rates below this make uniform rejection too slow
/// for the attempt budget.
const MIN_UNIFORM_RATE: f64 = 0.02;

fn choose_sampling<R: Rng + ?Sized>(sig: &PredicateSignature, grounder: &Grounder, rng: &mut R) -> Sampling {
    let pos = (0..PILOT_DRAWS)
        .filter(|_| grounder.evaluate_atoms(&random_atoms(sig, rng)))
        .count();
    let rate = pos as f64 / PILOT_DRAWS as f64;
    if rate.min(1.0 - rate) >= MIN_UNIFORM_RATE {
        Sampling::Uniform
    } else {
        Sampling::Planted
    }
}

fn fill_splits(
    sig: &PredicateSignature,
    hypothesis: &RuleSet,
    sizes: &SplitSizes,
    rng: &mut ChaCha8Rng,
) -> Result<Option<[Vec<GroundExample>; 3]>> {
    let grounder = Grounder::new(hypothesis, sig)?;
    // The pilot runs on a side stream and leaves `rng` untouched.
    let mut pilot = rng.clone();
    pilot.set_stream(1);
    let sampling = choose_sampling(sig, &grounder, &mut pilot);
    let bindings: Vec<Vec<usize>> = enumerate_bindings(sig.num_objects, sig.num_vars)?
        .into_iter()
        .map(|b| b.into_inner())
        .collect();
    let budget = 100 * sizes.total();
    let mut attempts = 0usize;
    let mut seen: HashSet<Vec<i8>> = HashSet::with_capacity(sizes.total());
    let mut out: [Vec<GroundExample>; 3] = Default::default();
    for (split, size) in out.iter_mut().zip([sizes.train, sizes.validation, sizes.test]) {
        let mut need_pos = size / 2;
        let mut need_neg = size - need_pos;
        while need_pos + need_neg > 0 {
            attempts += 1;
            if attempts > budget {
                return Ok(None);
            }
            let candidate = match sampling {
                Sampling::Uniform => Some(random_atoms(sig, rng)),
                Sampling::Planted if need_pos > 0 && (need_neg == 0 || rng.random_bool(0.5)) => {
                    plant_rule(sig, hypothesis, &bindings, rng).map(|(a, _)| a)
                }
                Sampling::Planted if rng.random_bool(NEAR_MISS_SHARE) => near_miss(sig, hypothesis, &bindings, rng),
                Sampling::Planted => Some(random_atoms(sig, rng)),
            };
            let Some(atoms) = candidate else {
                return Ok(None);
            };
            let label = grounder.evaluate_atoms(&atoms);
            let slot = if label { &mut need_pos } else { &mut need_neg };
            if *slot == 0 || seen.contains(&atoms) {
                continue;
            }
            *slot -= 1;
            seen.insert(atoms.clone());
            split.push(GroundExample { atoms, label });
        }
        split.shuffle(rng);
    }
    Ok(Some(out))
}

fn apply_noise_with<R: Rng + ?Sized>(
    examples: &[GroundExample],
    p: f64,
    sig: &PredicateSignature,
    rng: &mut R,
) -> Vec<GroundExample> {
    examples
        .iter()
        .map(|ex| {
            let mut ex = ex.clone();
            for (i, a) in ex.atoms.iter_mut().enumerate() {
                if sig.is_edge(i) && rng.random_bool(p) {
                    *a = -*a;
                }
            }
            ex
        })
        .collect()
}

/// Flips every unary and binary atom independently with probability `p`.
/// Nullary atoms and labels are left alone.
pub fn apply_noise(
    examples: &[GroundExample],
    p: f64,
    sig: &PredicateSignature,
    seed: u64,
) -> Result<Vec<GroundExample>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("noise probability {p} outside [0, 1]")));
    }
    Ok(apply_noise_with(examples, p, sig, &mut ChaCha8Rng::seed_from_u64(seed)))
}

/// Samples a hypothesis and three disjoint, class-balanced splits.
///
/// A pilot of uniform graphs estimates the hypothesis' positive rate. If
/// both classes are common enough, splits are filled by uniform sampling
/// with rejection. Otherwise positives are drawn by embedding a hypothesis
/// rule into a random graph, and negative candidates are uniform graphs or,
/// with probability 1/4, near misses (an embedded rule with some of its
/// atoms flipped). Every candidate is labelled by the grounder and kept only
/// if its class still needs examples. A hypothesis that cannot fill both
/// classes within `100 * total` draws is replaced. Noise touches the
/// training split only.
pub fn generate_dataset(diff: Difficulty, sizes: SplitSizes, noise_prob: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&noise_prob) {
        return Err(Error::Config(format!("noise probability {noise_prob} outside [0, 1]")));
    }
    let sig = diff.signature();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_HYPOTHESES {
        let hypothesis = sample_hypothesis_with(diff, &mut rng);
        let Some([train, validation, test]) = fill_splits(&sig, &hypothesis, &sizes, &mut rng)? else {
            continue;
        };
        let train = apply_noise_with(&train, noise_prob, &sig, &mut rng);
        return Ok(Dataset {
            difficulty: diff,
            signature: sig,
            hypothesis,
            noise_prob,
            seed,
            train,
            validation,
            test,
        });
    }
    Err(Error::Generation {
        seed,
        reason: format!("no hypothesis filled the splits within {MAX_HYPOTHESES} attempts"),
    })
}
