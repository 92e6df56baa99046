//! Gradient-descent training of a [`DnfModel`].
//!
//! Adam on the mean negative log-likelihood of each batch, with the gate
//! magnitude `|delta|` raised geometrically once per epoch (`eval_every`
//! updates) until it saturates at 1.

mod adam;
mod loss;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::nll_loss;

use crate::dnfmodel::{DnfGradient, DnfModel, GatherTable};
use crate::error::{Error, Result};
use crate::graphgen::Dataset;
use crate::signature::GroundExample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub total_batch_updates: usize,
    pub eval_every: usize,
    pub delta_start: f64,
    pub delta_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub prob_clamp: f64,
    pub init_std: f64,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 128,
            total_batch_updates: 10_000,
            eval_every: 200,
            delta_start: 0.1,
            delta_rate: 1.1,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            prob_clamp: 1e-5,
            init_std: 0.1,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("delta_start", self.delta_start),
            ("adam_eps", self.adam_eps),
            ("prob_clamp", self.prob_clamp),
            ("init_std", self.init_std),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.batch_size == 0 || self.eval_every == 0 {
            return Err(Error::Config("batch_size and eval_every must be positive".into()));
        }
        if self.delta_start > 1.0 {
            return Err(Error::Config(format!("delta_start {} exceeds 1", self.delta_start)));
        }
        if !(self.delta_rate >= 1.0 && self.delta_rate.is_finite()) {
            return Err(Error::Config(format!("delta_rate {} below 1", self.delta_rate)));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.prob_clamp >= 0.5 {
            return Err(Error::Config("prob_clamp must be below 0.5".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// `min(1, delta_start * delta_rate^epoch)`.
pub fn delta_schedule(epoch: usize, cfg: &TrainConfig) -> f64 {
    let e = i32::try_from(epoch).unwrap_or(i32::MAX);
    (cfg.delta_start * cfg.delta_rate.powi(e)).min(1.0)
}

/// One evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub update: usize,
    pub epoch: usize,
    pub delta: f64,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub wall_time_s: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "update,epoch,delta,train_loss,train_acc,val_acc,test_acc,wall_time_s";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3}",
            self.update,
            self.epoch,
            self.delta,
            self.train_loss,
            self.train_acc,
            self.val_acc,
            self.test_acc,
            self.wall_time_s
        )
    }
}

/// Loss sum and correct count over a set of examples.
fn score_split(table: &GatherTable, m: &DnfModel, examples: &[GroundExample], prob_clamp: f64) -> (f64, usize) {
    let per: Vec<(f64, bool)> = examples
        .par_iter()
        .map(|ex| {
            let t = table.forward_unchecked(&ex.atoms, m).t_score;
            (nll_loss(t, ex.label, prob_clamp).0, (t > 0.0) == ex.label)
        })
        .collect();
    per.iter()
        .fold((0.0, 0), |(l, c), (li, ok)| (l + li, c + usize::from(*ok)))
}

fn check_examples(table: &GatherTable, examples: &[GroundExample]) -> Result<()> {
    if examples.is_empty() {
        return Err(Error::Empty("example list"));
    }
    examples.iter().try_for_each(|ex| ex.check_shape(table.signature()))
}

/// Accuracy using a prebuilt gather table; avoids rebuilding it per call.
pub fn accuracy_with(table: &GatherTable, m: &DnfModel, examples: &[GroundExample]) -> Result<f64> {
    check_examples(table, examples)?;
    let (_, correct) = score_split(table, m, examples, 0.25);
    Ok(correct as f64 / examples.len() as f64)
}

/// Fraction of examples where `t_score > 0` matches the label.
pub fn evaluate_accuracy(m: &DnfModel, examples: &[GroundExample]) -> Result<f64> {
    m.validate()?;
    accuracy_with(&GatherTable::new(&m.signature)?, m, examples)
}

/// Mean loss and gradient over one batch. Per-example gradients are computed
/// in parallel and summed in batch order.
fn batch_gradient(
    table: &GatherTable,
    m: &DnfModel,
    examples: &[GroundExample],
    batch: &[usize],
    prob_clamp: f64,
) -> (f64, DnfGradient) {
    let parts: Vec<(f64, DnfGradient)> = batch
        .par_iter()
        .map(|&i| {
            let ex = &examples[i];
            let t = table.forward_unchecked(&ex.atoms, m).t_score;
            let (loss, dl) = nll_loss(t, ex.label, prob_clamp);
            let mut g = DnfGradient::zeros_like(m);
            if dl != 0.0 {
                table.backward_unchecked(&ex.atoms, m, dl, &mut g);
            }
            (loss, g)
        })
        .collect();
    let mut total = DnfGradient::zeros_like(m);
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        total.add_assign(g);
    }
    let scale = 1.0 / batch.len() as f64;
    total.scale(scale);
    (loss * scale, total)
}

/// Endless stream of shuffled passes over `0..n`.
struct BatchSampler {
    order: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    fn new(n: usize, rng: ChaCha8Rng) -> Self {
        let mut s = Self {
            order: (0..n).collect(),
            cursor: n,
            rng,
        };
        s.reshuffle();
        s
    }

    fn reshuffle(&mut self) {
        self.order.shuffle(&mut self.rng);
        self.cursor = 0;
    }

    fn next_batch(&mut self, size: usize, out: &mut Vec<usize>) {
        out.clear();
        while out.len() < size {
            if self.cursor == self.order.len() {
                self.reshuffle();
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
    }
}

/// Trains a fresh model and returns it with every metrics row.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(DnfModel, Vec<Metrics>)> {
    let mut rows = Vec::new();
    let model = train_with(ds, cfg, |m| {
        rows.push(m.clone());
        Ok(())
    })?;
    Ok((model, rows))
}

/// As [`train`], handing each metrics row to `on_metrics` as soon as it exists.
pub fn train_with<F>(ds: &Dataset, cfg: &TrainConfig, mut on_metrics: F) -> Result<DnfModel>
where
    F: FnMut(&Metrics) -> Result<()>,
{
    cfg.validate()?;
    ds.validate()?;
    let sig = ds.signature;
    let table = GatherTable::new(&sig)?;
    for split in [&ds.train, &ds.validation, &ds.test] {
        check_examples(&table, split)?;
    }

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut model = DnfModel::random(&sig, cfg.init_std, delta_schedule(0, cfg), &mut rng)?;
    let mut sampler = BatchSampler::new(ds.train.len(), ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(1)));
    let mut adam = AdamState::new(model.weight_count());
    let adam_cfg = cfg.adam();

    let evaluate = |model: &DnfModel, update: usize| -> Metrics {
        let (train_loss, train_ok) = score_split(&table, model, &ds.train, cfg.prob_clamp);
        let (_, val_ok) = score_split(&table, model, &ds.validation, cfg.prob_clamp);
        let (_, test_ok) = score_split(&table, model, &ds.test, cfg.prob_clamp);
        Metrics {
            update,
            epoch: update / cfg.eval_every,
            delta: model.gate,
            train_loss: train_loss / ds.train.len() as f64,
            train_acc: train_ok as f64 / ds.train.len() as f64,
            val_acc: val_ok as f64 / ds.validation.len() as f64,
            test_acc: test_ok as f64 / ds.test.len() as f64,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    };

    on_metrics(&evaluate(&model, 0))?;
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut params = model.flat_weights();
    for update in 1..=cfg.total_batch_updates {
        sampler.next_batch(cfg.batch_size, &mut batch);
        let (loss, grad) = batch_gradient(&table, &model, &ds.train, &batch, cfg.prob_clamp);
        let flat = grad.flatten();
        if !loss.is_finite() || flat.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                update,
                detail: format!("batch loss {loss}, gate {}", model.gate),
            });
        }
        adam_step(&mut params, &flat, &mut adam, &adam_cfg)?;
        model.set_flat_weights(&params)?;
        if update % cfg.eval_every == 0 {
            model.gate = delta_schedule(update / cfg.eval_every, cfg);
            on_metrics(&evaluate(&model, update))?;
        }
    }
    Ok(model)
}
