//! The three-network regression model and its training objective.
//!
//! A feature extractor `net_f` (dense sigmoid layers) feeds two heads: a
//! one-unit identity regressor `net_r` and a one-unit sigmoid domain
//! discriminator `net_d` that estimates the probability a sample came from
//! the target domain (source = 0, target = 1).
//!
//! With regression loss `L_r = (prediction - truth)^2` on labeled source
//! samples and log loss `L_d` on the discriminator over both domains, the
//! scalar objective for source set S and target set T is
//!
//! ```text
//! E = (1/|S|) Σ_S L_r  -  (λ / (|S|+|T|)) Σ_{S∪T} L_d
//! ```
//!
//! Training drives the regressor and extractor down `L_r` while the
//! gradient-reversal stage between `net_f` and `net_d` makes the extractor
//! *ascend* `L_d` — the discriminator's own updates still descend it — so the
//! feature distributions of the two domains are pushed together.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, DomainLabel, Sample};
use crate::fmath;
use crate::layer::{Activation, DenseLayer};
use crate::tape::{GradientSet, LayerGrad, Tape};
use crate::{Error, Result};

/// Discriminator probabilities are clamped to
/// `[DOMAIN_PROB_EPSILON, 1 - DOMAIN_PROB_EPSILON]` before the log loss, so
/// the loss stays below ~16.1 and its derivative below ~1e7 even when the
/// discriminator saturates.
pub const DOMAIN_PROB_EPSILON: f64 = 1e-7;

/// Squared error `(prediction - truth)^2`.
pub fn regression_loss(prediction: f64, truth: f64) -> f64 {
    let d = prediction - truth;
    d * d
}

/// Log loss of the discriminator output `p` against the domain indicator:
/// `-ln(p)` for target samples, `-ln(1-p)` for source samples, with `p`
/// clamped per [`DOMAIN_PROB_EPSILON`]. `p` outside the open unit interval
/// cannot come from the sigmoid head and is rejected.
pub fn domain_loss(p: f64, domain: DomainLabel) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Numeric(format!(
            "discriminator probability must lie in (0,1), got {p}"
        )));
    }
    let pc = p.clamp(DOMAIN_PROB_EPSILON, 1.0 - DOMAIN_PROB_EPSILON);
    Ok(match domain {
        DomainLabel::Target => -fmath::ln(pc),
        DomainLabel::Source => -fmath::ln(1.0 - pc),
    })
}

/// `d(domain_loss)/dp`. Zero inside the clamp bands (the clamped loss is
/// flat there), `(p - indicator) / (p (1 - p))` elsewhere.
pub fn domain_loss_derivative(p: f64, domain: DomainLabel) -> f64 {
    if p < DOMAIN_PROB_EPSILON || p > 1.0 - DOMAIN_PROB_EPSILON {
        return 0.0;
    }
    (p - domain.indicator()) / (p * (1.0 - p))
}

/// Architecture descriptor: input width and the width of every feature
/// layer; the last entry is the feature dimension both heads consume.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelShape {
    pub input_dim: usize,
    pub feature_layers: Vec<usize>,
}

impl ModelShape {
    pub fn new(input_dim: usize, feature_layers: Vec<usize>) -> Self {
        Self {
            input_dim,
            feature_layers,
        }
    }

    pub fn feature_dim(&self) -> usize {
        *self.feature_layers.last().unwrap_or(&0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("model input_dim must be positive".into()));
        }
        if self.feature_layers.is_empty() {
            return Err(Error::Config(
                "model needs at least one feature layer".into(),
            ));
        }
        if self.feature_layers.iter().any(|&w| w == 0) {
            return Err(Error::Config("feature layer widths must be positive".into()));
        }
        Ok(())
    }
}

/// Feature extractor plus regression and domain heads.
#[derive(Debug, Clone, PartialEq)]
pub struct DannrModel {
    net_f: Vec<DenseLayer>,
    net_r: DenseLayer,
    net_d: DenseLayer,
}

impl DannrModel {
    /// Assembles a model from explicit layers, enforcing the architecture
    /// contract: sigmoid feature layers with matching widths, a one-unit
    /// identity regressor, and a one-unit sigmoid discriminator.
    pub fn new(net_f: Vec<DenseLayer>, net_r: DenseLayer, net_d: DenseLayer) -> Result<Self> {
        if net_f.is_empty() {
            return Err(Error::Config(
                "feature extractor needs at least one layer".into(),
            ));
        }
        for (i, l) in net_f.iter().enumerate() {
            if l.activation() != Activation::Sigmoid {
                return Err(Error::Config(format!(
                    "feature layer {i} must use the sigmoid activation"
                )));
            }
            if i + 1 < net_f.len() && l.out_dim() != net_f[i + 1].in_dim() {
                return Err(Error::Shape(format!(
                    "feature layer {i} outputs {} values, layer {} expects {}",
                    l.out_dim(),
                    i + 1,
                    net_f[i + 1].in_dim()
                )));
            }
        }
        let feature_dim = net_f.last().expect("non-empty").out_dim();
        for (name, head) in [("regressor", &net_r), ("discriminator", &net_d)] {
            if head.in_dim() != feature_dim {
                return Err(Error::Shape(format!(
                    "{name} expects {} inputs, feature extractor emits {feature_dim}",
                    head.in_dim()
                )));
            }
            if head.out_dim() != 1 {
                return Err(Error::Shape(format!(
                    "{name} must emit one value, emits {}",
                    head.out_dim()
                )));
            }
        }
        if net_r.activation() != Activation::Identity {
            return Err(Error::Config("regressor head must be linear".into()));
        }
        if net_d.activation() != Activation::Sigmoid {
            return Err(Error::Config(
                "discriminator head must use the sigmoid activation".into(),
            ));
        }
        Ok(Self { net_f, net_r, net_d })
    }

    /// Random model for `shape`: layers are initialized from a ChaCha stream
    /// seeded with `seed`, in order feature layers → regressor →
    /// discriminator, weights uniform in ±1/sqrt(fan_in), biases zero.
    pub fn seeded(shape: &ModelShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net_f = Vec::with_capacity(shape.feature_layers.len());
        let mut in_dim = shape.input_dim;
        for &width in &shape.feature_layers {
            net_f.push(DenseLayer::seeded(in_dim, width, Activation::Sigmoid, &mut rng));
            in_dim = width;
        }
        let net_r = DenseLayer::seeded(in_dim, 1, Activation::Identity, &mut rng);
        let net_d = DenseLayer::seeded(in_dim, 1, Activation::Sigmoid, &mut rng);
        Self::new(net_f, net_r, net_d)
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape {
            input_dim: self.input_dim(),
            feature_layers: self.net_f.iter().map(|l| l.out_dim()).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.net_f[0].in_dim()
    }

    pub fn feature_dim(&self) -> usize {
        self.net_f.last().expect("non-empty").out_dim()
    }

    pub fn feature_layers(&self) -> &[DenseLayer] {
        &self.net_f
    }

    pub fn regressor(&self) -> &DenseLayer {
        &self.net_r
    }

    pub fn discriminator(&self) -> &DenseLayer {
        &self.net_d
    }

    /// Output of the feature extractor.
    pub fn features(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.net_f[0].forward(input)?;
        for l in &self.net_f[1..] {
            v = l.forward(&v)?;
        }
        Ok(v)
    }

    /// Regression prediction for one input.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        let feats = self.features(input)?;
        Ok(self.net_r.forward(&feats)?[0])
    }

    /// Estimated probability that `input` came from the target domain;
    /// strictly inside (0, 1).
    pub fn discriminate(&self, input: &[f64]) -> Result<f64> {
        let feats = self.features(input)?;
        Ok(self.net_d.forward(&feats)?[0])
    }

    /// Layer table for tape passes: ids `0..n` are the feature layers, `n`
    /// the regressor, `n+1` the discriminator.
    pub(crate) fn layer_table(&self) -> Vec<&DenseLayer> {
        let mut t: Vec<&DenseLayer> = self.net_f.iter().collect();
        t.push(&self.net_r);
        t.push(&self.net_d);
        t
    }

    pub(crate) fn regressor_id(&self) -> usize {
        self.net_f.len()
    }

    pub(crate) fn discriminator_id(&self) -> usize {
        self.net_f.len() + 1
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [DenseLayer], &mut DenseLayer, &mut DenseLayer) {
        (&mut self.net_f, &mut self.net_r, &mut self.net_d)
    }

    fn layer_param_count(l: &DenseLayer) -> usize {
        l.out_dim() * l.in_dim() + l.out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layer_table().iter().map(|l| Self::layer_param_count(l)).sum()
    }

    /// Total parameter counts of the (extractor, regressor, discriminator)
    /// blocks, in the order [`flat_params`] lays them out.
    ///
    /// [`flat_params`]: DannrModel::flat_params
    pub fn param_block_sizes(&self) -> (usize, usize, usize) {
        let f = self.net_f.iter().map(Self::layer_param_count).sum();
        (
            f,
            Self::layer_param_count(&self.net_r),
            Self::layer_param_count(&self.net_d),
        )
    }

    /// All parameters as one vector: each feature layer (weights row-major,
    /// then bias), then the regressor, then the discriminator.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in self.layer_table() {
            out.extend_from_slice(l.weights().as_slice());
            out.extend_from_slice(l.bias());
        }
        out
    }

    /// Writes a parameter vector in [`flat_params`] order back into the
    /// model. Rejects wrong lengths and non-finite values.
    ///
    /// [`flat_params`]: DannrModel::flat_params
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        if let Some(bad) = params.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "parameter {bad} is not finite: {}",
                params[bad]
            )));
        }
        let mut offset = 0;
        let (net_f, net_r, net_d) = self.parts_mut();
        for l in net_f.iter_mut().chain([net_r, net_d]) {
            let nw = l.out_dim() * l.in_dim();
            let nb = l.out_dim();
            l.weights_mut().copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            l.bias_mut().copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }
}

/// Gradient buffers shaped like a [`DannrModel`], indexed by the same layer
/// ids as [`DannrModel::layer_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub(crate) set: GradientSet,
    n_feature_layers: usize,
}

impl ModelGrads {
    pub fn zeros_like(model: &DannrModel) -> Self {
        Self {
            set: GradientSet::for_layers(&model.layer_table()),
            n_feature_layers: model.feature_layers().len(),
        }
    }

    pub fn feature_layer(&self, i: usize) -> &LayerGrad {
        assert!(i < self.n_feature_layers, "feature layer {i} out of range");
        self.set.layer(i)
    }

    pub fn regressor(&self) -> &LayerGrad {
        self.set.layer(self.n_feature_layers)
    }

    pub fn discriminator(&self) -> &LayerGrad {
        self.set.layer(self.n_feature_layers + 1)
    }

    pub fn add_scaled(&mut self, other: &ModelGrads, factor: f64) {
        self.set.add_scaled(&other.set, factor);
    }

    /// Multiplies only the discriminator block by `factor`.
    pub fn scale_discriminator(&mut self, factor: f64) {
        let id = self.n_feature_layers + 1;
        let g = self.set.layer_mut(id);
        g.weights.scale(factor);
        for b in &mut g.bias {
            *b *= factor;
        }
    }

    /// Gradients in [`DannrModel::flat_params`] order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for id in 0..self.set.len() {
            let l = self.set.layer(id);
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

fn validate_objective_inputs(
    model: &DannrModel,
    source: &Dataset,
    target: &Dataset,
    lambda: f64,
) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if source.is_empty() {
        return Err(Error::Input("source dataset is empty".into()));
    }
    if target.is_empty() {
        return Err(Error::Input("target dataset is empty".into()));
    }
    if !source.all_labeled() {
        return Err(Error::Input(
            "every source sample needs a label for the regression term".into(),
        ));
    }
    for (name, ds) in [("source", source), ("target", target)] {
        if ds.feature_dim() != model.input_dim() {
            return Err(Error::Shape(format!(
                "{name} dataset has {} features, model expects {}",
                ds.feature_dim(),
                model.input_dim()
            )));
        }
    }
    Ok(())
}

/// The scalar objective `E` over full datasets (see the module doc). Target
/// labels are ignored if present; source labels are required.
pub fn objective(
    model: &DannrModel,
    source: &Dataset,
    target: &Dataset,
    lambda: f64,
) -> Result<f64> {
    validate_objective_inputs(model, source, target, lambda)?;
    let mut reg_sum = 0.0;
    let mut dom_sum = 0.0;
    for s in source.samples() {
        let feats = model.features(&s.features)?;
        let y_hat = model.net_r.forward(&feats)?[0];
        reg_sum += regression_loss(y_hat, s.target.expect("validated above"));
        let p = model.net_d.forward(&feats)?[0];
        dom_sum += domain_loss(p, DomainLabel::Source)?;
    }
    for s in target.samples() {
        let p = model.discriminate(&s.features)?;
        dom_sum += domain_loss(p, DomainLabel::Target)?;
    }
    let n_s = source.len() as f64;
    let n_union = (source.len() + target.len()) as f64;
    Ok(reg_sum / n_s - lambda * dom_sum / n_union)
}

/// Exact gradient of [`objective`] with respect to every parameter.
///
/// The extractor block is assembled from the two backward channels — the
/// regression chains plus the domain chains whose adjoints passed the
/// reversal (already carrying `-λ`). The discriminator block is the mean raw
/// domain gradient scaled by `-λ`: the reversal sits upstream of `net_d`, so
/// the objective's sign and weight are applied here instead.
pub fn objective_gradients(
    model: &DannrModel,
    source: &Dataset,
    target: &Dataset,
    lambda: f64,
) -> Result<ModelGrads> {
    validate_objective_inputs(model, source, target, lambda)?;
    let w_reg = 1.0 / source.len() as f64;
    let w_dom = 1.0 / (source.len() + target.len()) as f64;
    let src: Vec<&Sample> = source.samples().iter().collect();
    let tgt: Vec<&Sample> = target.samples().iter().collect();

    let mut tape = Tape::new();
    let mut reg = ModelGrads::zeros_like(model);
    let mut dom = ModelGrads::zeros_like(model);
    model.accumulate_regression_grads(&src, w_reg, &mut reg, &mut tape)?;
    model.accumulate_domain_grads(&src, DomainLabel::Source, lambda, w_dom, &mut dom, &mut tape)?;
    model.accumulate_domain_grads(&tgt, DomainLabel::Target, lambda, w_dom, &mut dom, &mut tape)?;

    let mut out = reg;
    out.add_scaled(&dom, 1.0);
    out.scale_discriminator(-lambda);
    Ok(out)
}

impl DannrModel {
    /// Backpropagates the squared-error loss of every (labeled) sample
    /// through regressor and extractor, seeding each chain with
    /// `weight * dL_r/dprediction`. Returns the unweighted loss sum.
    pub(crate) fn accumulate_regression_grads(
        &self,
        samples: &[&Sample],
        weight: f64,
        grads: &mut ModelGrads,
        tape: &mut Tape,
    ) -> Result<f64> {
        let table = self.layer_table();
        let mut loss_sum = 0.0;
        for s in samples {
            let y = s.target.ok_or_else(|| {
                Error::Input("regression gradient needs a labeled sample".into())
            })?;
            tape.reset();
            let mut v = tape.dense_forward(&self.net_f[0], 0, &s.features)?;
            for (i, l) in self.net_f.iter().enumerate().skip(1) {
                v = tape.dense_forward(l, i, &v)?;
            }
            let y_hat = tape.dense_forward(&self.net_r, self.regressor_id(), &v)?[0];
            loss_sum += regression_loss(y_hat, y);
            let seed = [weight * 2.0 * (y_hat - y)];
            tape.backward(&table, &seed, &mut grads.set)?;
        }
        Ok(loss_sum)
    }

    /// Backpropagates the domain log loss of every sample through the
    /// discriminator and, via the reversal (strength `lambda`), the
    /// extractor. Feature-layer slots therefore accumulate
    /// `-λ * weight * dL_d/dθ_f` while the discriminator slot accumulates the
    /// raw `weight * dL_d/dθ_d`. Sample labels are never read. Returns the
    /// unweighted loss sum.
    pub(crate) fn accumulate_domain_grads(
        &self,
        samples: &[&Sample],
        domain: DomainLabel,
        lambda: f64,
        weight: f64,
        grads: &mut ModelGrads,
        tape: &mut Tape,
    ) -> Result<f64> {
        let table = self.layer_table();
        let mut loss_sum = 0.0;
        for s in samples {
            tape.reset();
            let mut v = tape.dense_forward(&self.net_f[0], 0, &s.features)?;
            for (i, l) in self.net_f.iter().enumerate().skip(1) {
                v = tape.dense_forward(l, i, &v)?;
            }
            let rv = tape.grad_reverse(&v, lambda)?;
            let p = tape.dense_forward(&self.net_d, self.discriminator_id(), &rv)?[0];
            loss_sum += domain_loss(p, domain)?;
            let seed = [weight * domain_loss_derivative(p, domain)];
            tape.backward(&table, &seed, &mut grads.set)?;
        }
        Ok(loss_sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use alloc::string::ToString;

    fn tiny_dataset(rows: &[(&[f64], Option<f64>)], domain: DomainLabel) -> Dataset {
        let dim = rows[0].0.len();
        let names = (0..dim).map(|i| format!("x{i}")).collect();
        let mut ds = Dataset::new(names, "y".to_string(), "test".to_string()).unwrap();
        for (x, y) in rows {
            ds.push(Sample {
                features: x.to_vec(),
                target: *y,
                domain,
            })
            .unwrap();
        }
        ds
    }

    /// Hand-assembled 2→2 model with fixed weights for arithmetic oracles.
    fn fixed_model() -> DannrModel {
        let net_f = vec![DenseLayer::new(
            Matrix::new(2, 2, vec![0.1, -0.2, 0.3, 0.4]).unwrap(),
            vec![0.05, -0.05],
            Activation::Sigmoid,
        )
        .unwrap()];
        let net_r = DenseLayer::new(
            Matrix::new(1, 2, vec![0.7, -0.6]).unwrap(),
            vec![0.1],
            Activation::Identity,
        )
        .unwrap();
        let net_d = DenseLayer::new(
            Matrix::new(1, 2, vec![0.5, 0.5]).unwrap(),
            vec![-0.2],
            Activation::Sigmoid,
        )
        .unwrap();
        DannrModel::new(net_f, net_r, net_d).unwrap()
    }

    /// Scalar re-derivation of the fixed model's heads, written without the
    /// matrix types so it can disagree with them.
    fn unrolled_heads(x0: f64, x1: f64) -> (f64, f64) {
        let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
        let h0 = sig(0.1 * x0 - 0.2 * x1 + 0.05);
        let h1 = sig(0.3 * x0 + 0.4 * x1 - 0.05);
        let y_hat = 0.7 * h0 - 0.6 * h1 + 0.1;
        let p = sig(0.5 * h0 + 0.5 * h1 - 0.2);
        (y_hat, p)
    }

    #[test]
    fn heads_match_unrolled_arithmetic() {
        let m = fixed_model();
        for (x0, x1) in [(0.2, 0.4), (-0.1, 0.6), (0.8, -0.3), (0.0, 0.0)] {
            let (want_y, want_p) = unrolled_heads(x0, x1);
            let got_y = m.predict(&[x0, x1]).unwrap();
            let got_p = m.discriminate(&[x0, x1]).unwrap();
            assert!((got_y - want_y).abs() < 1e-14, "predict({x0},{x1})");
            assert!((got_p - want_p).abs() < 1e-14, "discriminate({x0},{x1})");
        }
    }

    #[test]
    fn zero_weight_regressor_predicts_its_bias() {
        let mut m = fixed_model();
        let mut params = m.flat_params();
        // Regressor block sits after the extractor block: weights then bias.
        let (f, _r, _d) = m.param_block_sizes();
        params[f] = 0.0;
        params[f + 1] = 0.0;
        params[f + 2] = 0.37;
        m.set_flat_params(&params).unwrap();
        assert_eq!(m.predict(&[0.3, -0.8]).unwrap(), 0.37);
    }

    #[test]
    fn regression_loss_known_values() {
        assert_eq!(regression_loss(0.3, 0.3), 0.0);
        assert_eq!(regression_loss(1.0, 0.0), 1.0);
        assert!((regression_loss(0.7, 0.2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn domain_loss_known_values() {
        let ln2 = core::f64::consts::LN_2;
        assert!((domain_loss(0.5, DomainLabel::Source).unwrap() - ln2).abs() < 1e-15);
        assert!((domain_loss(0.5, DomainLabel::Target).unwrap() - ln2).abs() < 1e-15);
        // -ln(0.9), frozen from an independent high-precision evaluation.
        let got = domain_loss(0.9, DomainLabel::Target).unwrap();
        assert!((got - 0.10536051565782628).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn domain_loss_is_clamped_near_the_edges() {
        // p = 1e-9 clamps to 1e-7; the loss matches -ln(1e-7) for a target
        // sample and stays tiny for a source sample.
        let tgt = domain_loss(1e-9, DomainLabel::Target).unwrap();
        assert!((tgt - 16.11809565095832).abs() < 1e-10, "got {tgt}");
        let src = domain_loss(1e-9, DomainLabel::Source).unwrap();
        assert!((src - 1.000000050000003e-7).abs() < 1e-13, "got {src}");
        // Inside the clamp band the derivative is flat.
        assert_eq!(domain_loss_derivative(1e-9, DomainLabel::Target), 0.0);
    }

    #[test]
    fn domain_loss_rejects_degenerate_probabilities() {
        for p in [0.0, 1.0, -0.3, 1.5, f64::NAN] {
            let err = domain_loss(p, DomainLabel::Source).unwrap_err();
            assert!(matches!(err, Error::Numeric(_)), "p={p} gave {err:?}");
        }
    }

    #[test]
    fn objective_with_zero_lambda_is_mean_regression_loss() {
        let m = fixed_model();
        let src = tiny_dataset(
            &[(&[0.2, 0.4], Some(0.3)), (&[-0.1, 0.6], Some(0.5))],
            DomainLabel::Source,
        );
        let tgt = tiny_dataset(&[(&[0.8, -0.3], None)], DomainLabel::Target);
        let e = objective(&m, &src, &tgt, 0.0).unwrap();
        let mean_reg: f64 = src
            .samples()
            .iter()
            .map(|s| regression_loss(m.predict(&s.features).unwrap(), s.target.unwrap()))
            .sum::<f64>()
            / src.len() as f64;
        assert!((e - mean_reg).abs() < 1e-15);
    }

    #[test]
    fn objective_of_perfect_regressor_and_blind_discriminator() {
        // Regressor: zero weights, bias = the constant target. Discriminator:
        // zero weights, zero bias → p = 0.5 everywhere. With λ = 1 the
        // objective collapses to -ln 2.
        let net_f = vec![DenseLayer::new(
            Matrix::new(2, 2, vec![0.1, -0.2, 0.3, 0.4]).unwrap(),
            vec![0.0, 0.0],
            Activation::Sigmoid,
        )
        .unwrap()];
        let net_r = DenseLayer::new(
            Matrix::new(1, 2, vec![0.0, 0.0]).unwrap(),
            vec![0.42],
            Activation::Identity,
        )
        .unwrap();
        let net_d = DenseLayer::new(
            Matrix::new(1, 2, vec![0.0, 0.0]).unwrap(),
            vec![0.0],
            Activation::Sigmoid,
        )
        .unwrap();
        let m = DannrModel::new(net_f, net_r, net_d).unwrap();
        let src = tiny_dataset(
            &[(&[0.2, 0.4], Some(0.42)), (&[-0.6, 0.1], Some(0.42))],
            DomainLabel::Source,
        );
        let tgt = tiny_dataset(&[(&[0.9, -0.2], None)], DomainLabel::Target);
        let e = objective(&m, &src, &tgt, 1.0).unwrap();
        assert!((e - (-core::f64::consts::LN_2)).abs() < 1e-15, "got {e}");
    }

    #[test]
    fn objective_matches_longhand_composition() {
        let m = fixed_model();
        let src = tiny_dataset(
            &[(&[0.2, 0.4], Some(0.3)), (&[-0.1, 0.6], Some(0.5))],
            DomainLabel::Source,
        );
        let tgt = tiny_dataset(&[(&[0.8, -0.3], None)], DomainLabel::Target);
        let lambda = 0.7;

        // Independent longhand evaluation on the unrolled heads.
        let mut reg = 0.0;
        let mut dom = 0.0;
        for (x, y) in [([0.2, 0.4], 0.3), ([-0.1, 0.6], 0.5)] {
            let (y_hat, p) = unrolled_heads(x[0], x[1]);
            reg += (y_hat - y) * (y_hat - y);
            dom += -(1.0 - p).ln();
        }
        let (_, p) = unrolled_heads(0.8, -0.3);
        dom += -p.ln();
        let want = reg / 2.0 - lambda * dom / 3.0;

        let got = objective(&m, &src, &tgt, lambda).unwrap();
        assert!((got - want).abs() < 1e-14, "got {got}, want {want}");
    }

    #[test]
    fn objective_validates_its_inputs() {
        let m = fixed_model();
        let src = tiny_dataset(&[(&[0.2, 0.4], Some(0.3))], DomainLabel::Source);
        let tgt = tiny_dataset(&[(&[0.8, -0.3], None)], DomainLabel::Target);
        let empty = Dataset::new(
            vec!["x0".to_string(), "x1".to_string()],
            "y".to_string(),
            "empty".to_string(),
        )
        .unwrap();
        assert!(matches!(
            objective(&m, &empty, &tgt, 1.0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            objective(&m, &src, &empty, 1.0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            objective(&m, &src, &tgt, -0.1),
            Err(Error::Config(_))
        ));
        let unlabeled = tiny_dataset(&[(&[0.2, 0.4], None)], DomainLabel::Source);
        assert!(matches!(
            objective(&m, &unlabeled, &tgt, 1.0),
            Err(Error::Input(_))
        ));
    }

    fn seeded_case() -> (DannrModel, Dataset, Dataset) {
        let shape = ModelShape::new(3, vec![4]);
        let m = DannrModel::seeded(&shape, 17).unwrap();
        let src = tiny_dataset(
            &[
                (&[0.1, 0.9, 0.4], Some(0.2)),
                (&[0.7, 0.2, 0.8], Some(0.9)),
                (&[0.5, 0.5, 0.1], Some(0.4)),
            ],
            DomainLabel::Source,
        );
        let tgt = tiny_dataset(
            &[(&[0.9, 0.6, 0.3], None), (&[0.2, 0.1, 0.7], None)],
            DomainLabel::Target,
        );
        (m, src, tgt)
    }

    #[test]
    fn objective_gradients_match_finite_differences() {
        let (mut m, src, tgt) = seeded_case();
        let lambda = 0.8;
        let analytic = objective_gradients(&m, &src, &tgt, lambda).unwrap().flat();
        let base = m.flat_params();
        let h = 1e-5;
        for i in 0..base.len() {
            let mut params = base.clone();
            params[i] = base[i] + h;
            m.set_flat_params(&params).unwrap();
            let plus = objective(&m, &src, &tgt, lambda).unwrap();
            params[i] = base[i] - h;
            m.set_flat_params(&params).unwrap();
            let minus = objective(&m, &src, &tgt, lambda).unwrap();
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (analytic[i] - numeric).abs() / numeric.abs().max(1.0);
            assert!(
                rel < 1e-4,
                "param {i}: analytic {:.12} vs numeric {numeric:.12}",
                analytic[i]
            );
        }
        m.set_flat_params(&base).unwrap();
    }

    #[test]
    fn regressor_gradients_ignore_the_domain_term() {
        let (m, src, tgt) = seeded_case();
        let g0 = objective_gradients(&m, &src, &tgt, 0.0).unwrap();
        let g1 = objective_gradients(&m, &src, &tgt, 1.3).unwrap();
        assert_eq!(g0.regressor(), g1.regressor());
    }

    #[test]
    fn discriminator_gradients_ignore_source_labels() {
        let (m, src, tgt) = seeded_case();
        let relabeled = tiny_dataset(
            &[
                (&[0.1, 0.9, 0.4], Some(5.0)),
                (&[0.7, 0.2, 0.8], Some(-3.0)),
                (&[0.5, 0.5, 0.1], Some(0.0)),
            ],
            DomainLabel::Source,
        );
        let a = objective_gradients(&m, &src, &tgt, 0.9).unwrap();
        let b = objective_gradients(&m, &relabeled, &tgt, 0.9).unwrap();
        assert_eq!(a.discriminator(), b.discriminator());
    }

    #[test]
    fn seeded_models_are_deterministic_and_validated() {
        let shape = ModelShape::new(4, vec![60]);
        let a = DannrModel::seeded(&shape, 5).unwrap();
        let b = DannrModel::seeded(&shape, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.param_count(), 4 * 60 + 60 + (60 + 1) + (60 + 1));
        let bad = ModelShape::new(0, vec![3]);
        assert!(matches!(DannrModel::seeded(&bad, 5), Err(Error::Config(_))));
        let bad = ModelShape::new(4, vec![]);
        assert!(matches!(DannrModel::seeded(&bad, 5), Err(Error::Config(_))));
    }

    #[test]
    fn flat_params_round_trip() {
        let (m, _, _) = seeded_case();
        let mut copy = m.clone();
        let params = m.flat_params();
        copy.set_flat_params(&params).unwrap();
        assert_eq!(m, copy);
        let err = copy.set_flat_params(&params[1..]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)), "got {err:?}");
    }
}
