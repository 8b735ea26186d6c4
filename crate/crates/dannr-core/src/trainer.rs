//! Minibatch SGD trainers: the adversarial loop and the no-transfer baseline.
//!
//! Both trainers walk a seeded shuffled permutation of the source set once
//! per epoch in `batch_size` chunks (the last chunk may be smaller), so every
//! source sample contributes to the regression term exactly once per epoch.
//! The adversarial trainer pairs each source chunk with an equally sized
//! batch of target samples drawn with replacement, keeping the domain-loss
//! denominator balanced between the domains.
//!
//! Per-parameter updates follow the descent convention `θ ← θ − Δθ` with
//!
//! ```text
//! Δθ_f = μ (∂L̄_r/∂θ_f − λ ∂L̄_d/∂θ_f)     extractor
//! Δθ_r = μ ∂L̄_r/∂θ_r                      regressor
//! Δθ_d = μ λ ∂L̄_d/∂θ_d                    discriminator
//! ```
//!
//! where `L̄_r` averages over the source chunk and `L̄_d` over the combined
//! chunk — so the regressor descends its loss, the discriminator descends
//! its loss (scaled by λ), and the extractor descends the regression loss
//! while *ascending* the domain loss via the reversal stage.
//!
//! Reproducibility: the random streams for weight initialization, epoch
//! shuffling, and target batch draws are derived independently from
//! `TrainConfig::seed`, so a given (seed, config, data) triple yields
//! bit-identical parameters, and the baseline consumes exactly the same
//! initialization and shuffle streams as the adversarial trainer.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Sample};
use crate::eval::{mean_domain_loss, mse};
use crate::model::{DannrModel, ModelGrads, ModelShape};
use crate::schedule::LambdaSchedule;
use crate::seeds;
use crate::tape::Tape;
use crate::{Error, Result};

/// Hyper-parameters shared by both trainers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Learning rate μ.
    pub mu: f64,
    /// Schedule for the adversarial weight λ (ignored by the baseline).
    pub lambda_schedule: LambdaSchedule,
    /// Number of passes over the source set. Zero is allowed and returns the
    /// initialization untouched.
    pub epochs: usize,
    /// Source samples per minibatch; the target batch matches the source
    /// chunk size. Values above the dataset size simply yield one chunk.
    pub batch_size: usize,
    /// Root seed; initialization, shuffling, and target batch draws use
    /// independent streams derived from it.
    pub seed: u64,
    /// Whether to reshuffle the source order each epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    /// Plain SGD at μ = 0.05 with the adversarial weight decaying linearly
    /// from 1 to 0 over 200 epochs. Batches of 160 leave the feature
    /// extractor enough optimization steps to align the domains while the
    /// adversarial weight is high, without so many low-weight steps at the
    /// end of the run that the alignment is washed out again.
    fn default() -> Self {
        Self {
            mu: 0.05,
            lambda_schedule: LambdaSchedule::LinearDecay { start: 1.0, end: 0.0 },
            epochs: 200,
            batch_size: 160,
            seed: 42,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "learning rate mu must be finite and positive, got {}",
                self.mu
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        self.lambda_schedule.validate()
    }
}

/// Losses of one completed epoch, evaluated over the *full* datasets with
/// the post-epoch parameters (not averaged minibatch values), so the final
/// record matches a fresh evaluation of the returned model exactly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    /// λ used for this epoch (0 for the baseline trainer).
    pub lambda: f64,
    /// Mean squared error over the full source set.
    pub source_regression_loss: f64,
    /// Mean domain log loss over both full sets (0 for the baseline).
    pub domain_loss: f64,
    /// Wall-clock duration of the epoch. 0 when built without the `std`
    /// feature; excluded from all reproducibility guarantees.
    pub seconds: f64,
}

/// One record per completed epoch, in order.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainTrace {
    records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

#[cfg(feature = "std")]
struct EpochClock(std::time::Instant);

#[cfg(feature = "std")]
impl EpochClock {
    fn start() -> Self {
        Self(std::time::Instant::now())
    }

    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(not(feature = "std"))]
struct EpochClock;

#[cfg(not(feature = "std"))]
impl EpochClock {
    fn start() -> Self {
        Self
    }

    fn seconds(&self) -> f64 {
        0.0
    }
}

/// The model both trainers start from for a given root seed: the weight
/// initialization stream is derived from the seed independently of the
/// shuffle and target-draw streams.
pub fn init_model(shape: &ModelShape, seed: u64) -> Result<DannrModel> {
    DannrModel::seeded(shape, seeds::derive(seed, "init"))
}

fn validate_training_inputs(
    model: &DannrModel,
    source: &Dataset,
    target: Option<&Dataset>,
) -> Result<()> {
    if source.is_empty() {
        return Err(Error::Input("source dataset is empty".into()));
    }
    if !source.all_labeled() {
        return Err(Error::Input(
            "every source sample needs a label for training".into(),
        ));
    }
    if source.feature_dim() != model.input_dim() {
        return Err(Error::Shape(alloc::format!(
            "source dataset has {} features, model expects {}",
            source.feature_dim(),
            model.input_dim()
        )));
    }
    if let Some(t) = target {
        if t.is_empty() {
            return Err(Error::Input("target dataset is empty".into()));
        }
        if t.feature_dim() != model.input_dim() {
            return Err(Error::Shape(alloc::format!(
                "target dataset has {} features, model expects {}",
                t.feature_dim(),
                model.input_dim()
            )));
        }
    }
    Ok(())
}

fn permutation<R: Rng>(n: usize, shuffle: bool, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(rng);
    }
    order
}

fn check_finite(value: f64, quantity: &'static str, epoch: usize, batch: usize) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { quantity, epoch, batch })
    }
}

/// One adversarial SGD update on explicit minibatches (see the module doc
/// for the per-block update rules). Returns the mean regression loss of the
/// source batch and the mean domain loss of the combined batch, both
/// measured at the *pre-update* parameters.
pub fn adversarial_step(
    model: &mut DannrModel,
    source_batch: &[&Sample],
    target_batch: &[&Sample],
    lambda: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if source_batch.is_empty() || target_batch.is_empty() {
        return Err(Error::Input("minibatches must be non-empty".into()));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Config(alloc::format!(
            "learning rate mu must be finite and positive, got {mu}"
        )));
    }
    let w_reg = 1.0 / source_batch.len() as f64;
    let w_dom = 1.0 / (source_batch.len() + target_batch.len()) as f64;

    let mut tape = Tape::new();
    let mut reg = ModelGrads::zeros_like(model);
    let mut dom = ModelGrads::zeros_like(model);
    let reg_sum = model.accumulate_regression_grads(source_batch, w_reg, &mut reg, &mut tape)?;
    let mut dom_sum = model.accumulate_domain_grads(
        source_batch,
        crate::data::DomainLabel::Source,
        lambda,
        w_dom,
        &mut dom,
        &mut tape,
    )?;
    dom_sum += model.accumulate_domain_grads(
        target_batch,
        crate::data::DomainLabel::Target,
        lambda,
        w_dom,
        &mut dom,
        &mut tape,
    )?;

    // Extractor slots now hold ∂L̄_r/∂θ_f − λ∂L̄_d/∂θ_f once merged (the
    // reversal already carried the −λ); the discriminator slot holds the raw
    // ∂L̄_d/∂θ_d and gets its λ at application time.
    let mut combined = reg;
    combined.add_scaled(&dom, 1.0);

    let (net_f, net_r, net_d) = model.parts_mut();
    for (i, layer) in net_f.iter_mut().enumerate() {
        let g = combined.feature_layer(i);
        layer.add_scaled(&g.weights, &g.bias, -mu);
    }
    {
        let g = combined.regressor();
        net_r.add_scaled(&g.weights, &g.bias, -mu);
    }
    {
        let g = combined.discriminator();
        net_d.add_scaled(&g.weights, &g.bias, -(mu * lambda));
    }

    Ok((
        reg_sum / source_batch.len() as f64,
        dom_sum / (source_batch.len() + target_batch.len()) as f64,
    ))
}

/// Plain SGD update on the regression path only; the discriminator is not
/// touched. Returns the mean regression loss of the batch (pre-update).
fn regression_step(model: &mut DannrModel, source_batch: &[&Sample], mu: f64) -> Result<f64> {
    let w_reg = 1.0 / source_batch.len() as f64;
    let mut tape = Tape::new();
    let mut reg = ModelGrads::zeros_like(model);
    let reg_sum = model.accumulate_regression_grads(source_batch, w_reg, &mut reg, &mut tape)?;
    let (net_f, net_r, _net_d) = model.parts_mut();
    for (i, layer) in net_f.iter_mut().enumerate() {
        let g = reg.feature_layer(i);
        layer.add_scaled(&g.weights, &g.bias, -mu);
    }
    let g = reg.regressor();
    net_r.add_scaled(&g.weights, &g.bias, -mu);
    Ok(reg_sum / source_batch.len() as f64)
}

/// Adversarial training: fits the regression path on the labeled source set
/// while aligning the feature distributions of source and target. Target
/// labels, if present, are never read. Consumes the starting model (usually
/// from [`init_model`]) and returns the trained model with its trace.
pub fn train_dannr(
    model: DannrModel,
    source: &Dataset,
    target: &Dataset,
    cfg: &TrainConfig,
) -> Result<(DannrModel, TrainTrace)> {
    cfg.validate()?;
    validate_training_inputs(&model, source, Some(target))?;
    let mut model = model;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, "shuffle"));
    let mut target_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, "target_draw"));
    let mut records = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let clock = EpochClock::start();
        let lambda = cfg.lambda_schedule.lambda_at(epoch, cfg.epochs)?;
        let order = permutation(source.len(), cfg.shuffle, &mut shuffle_rng);
        let mut batches = 0;
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let source_batch: Vec<&Sample> =
                chunk.iter().map(|&i| &source.samples()[i]).collect();
            let target_batch: Vec<&Sample> = (0..chunk.len())
                .map(|_| &target.samples()[target_rng.random_range(0..target.len())])
                .collect();
            let (reg, dom) = adversarial_step(&mut model, &source_batch, &target_batch, lambda, cfg.mu)?;
            check_finite(reg, "batch regression loss", epoch, batch)?;
            check_finite(dom, "batch domain loss", epoch, batch)?;
            batches += 1;
        }
        let source_regression_loss = mse(&model, source)?;
        let domain_loss = mean_domain_loss(&model, source, target)?;
        check_finite(source_regression_loss, "epoch regression loss", epoch, batches)?;
        check_finite(domain_loss, "epoch domain loss", epoch, batches)?;
        records.push(EpochRecord {
            epoch,
            lambda,
            source_regression_loss,
            domain_loss,
            seconds: clock.seconds(),
        });
    }
    Ok((model, TrainTrace { records }))
}

/// No-transfer baseline: initializes a model for `shape` from the config
/// seed and fits only the regression path on the source set. The
/// discriminator stays at its initialization; trace records carry `lambda`
/// and `domain_loss` as 0.
pub fn train_baseline(
    shape: &ModelShape,
    source: &Dataset,
    cfg: &TrainConfig,
) -> Result<(DannrModel, TrainTrace)> {
    cfg.validate()?;
    let mut model = init_model(shape, cfg.seed)?;
    validate_training_inputs(&model, source, None)?;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, "shuffle"));
    let mut records = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let clock = EpochClock::start();
        let order = permutation(source.len(), cfg.shuffle, &mut shuffle_rng);
        let mut batches = 0;
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let source_batch: Vec<&Sample> =
                chunk.iter().map(|&i| &source.samples()[i]).collect();
            let reg = regression_step(&mut model, &source_batch, cfg.mu)?;
            check_finite(reg, "batch regression loss", epoch, batch)?;
            batches += 1;
        }
        let source_regression_loss = mse(&model, source)?;
        check_finite(source_regression_loss, "epoch regression loss", epoch, batches)?;
        records.push(EpochRecord {
            epoch,
            lambda: 0.0,
            source_regression_loss,
            domain_loss: 0.0,
            seconds: clock.seconds(),
        });
    }
    Ok((model, TrainTrace { records }))
}
