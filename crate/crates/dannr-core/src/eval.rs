//! Transfer-experiment metrics and the cross-plant evaluation matrix.
//!
//! The central score is the *transfer ratio*
//!
//! ```text
//! transfer_ratio = target MSE without transfer / target MSE with transfer
//! ```
//!
//! (> 1 means the adversarial training helped on the target domain). A
//! *probe* measures feature alignment directly: a fresh logistic classifier
//! is trained to tell the domains apart from the frozen extractor features —
//! the closer its held-out accuracy is to 0.5, the more indistinguishable
//! the domains look to any discriminator.
//!
//! [`run_experiment_matrix`] evaluates every plant of a fleet as the target
//! domain once, with the source role filled per [`MatrixMode`]. All MSEs are
//! reported on the normalized scale fitted to the *source* data only —
//! target statistics never influence training or normalization.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{apply_normalizer, fit_normalizer, Dataset, DomainLabel};
use crate::matrix::Matrix;
use crate::model::{domain_loss, DannrModel, ModelShape};
use crate::seeds;
use crate::trainer::{init_model, train_baseline, train_dannr, TrainConfig};
use crate::{Error, Result};

/// How the source domain is chosen for each target plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MatrixMode {
    /// One single other plant (cyclically, plant `(t+1) mod n`) is the source.
    OneToOne,
    /// All other plants pooled together form the source.
    RestToOne,
}

impl MatrixMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixMode::OneToOne => "one_to_one",
            MatrixMode::RestToOne => "rest_to_one",
        }
    }
}

impl core::fmt::Display for MatrixMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for MatrixMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_to_one" => Ok(MatrixMode::OneToOne),
            "rest_to_one" => Ok(MatrixMode::RestToOne),
            other => Err(Error::Config(format!(
                "unknown matrix mode {other:?}, expected one_to_one or rest_to_one"
            ))),
        }
    }
}

/// Outcome of one (source, target) transfer experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub target_name: String,
    pub source_name: String,
    /// MSE of the baseline model on the (normalized) source data.
    pub source_mse_no_tl: f64,
    /// MSE of the adversarially trained model on the source data.
    pub source_mse_tl: f64,
    /// MSE of the baseline model on the target data.
    pub target_mse_no_tl: f64,
    /// MSE of the adversarially trained model on the target data.
    pub target_mse_tl: f64,
    /// Always exactly `target_mse_no_tl / target_mse_tl`.
    pub transfer_ratio: f64,
    /// Held-out domain-probe accuracy on the baseline model's features.
    pub probe_accuracy_baseline: f64,
    /// Held-out domain-probe accuracy on the adversarial model's features.
    pub probe_accuracy_dannr: f64,
    /// Root seed the cell was run with.
    pub seed: u64,
    /// Digest of the resolved (architecture, training config, mode) triple.
    pub config_digest: String,
}

impl EvalReport {
    /// Checks the report's internal consistency; survives value-exact
    /// serialization round-trips.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("source_mse_no_tl", self.source_mse_no_tl),
            ("source_mse_tl", self.source_mse_tl),
            ("target_mse_no_tl", self.target_mse_no_tl),
            ("target_mse_tl", self.target_mse_tl),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Numeric(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.transfer_ratio != self.target_mse_no_tl / self.target_mse_tl {
            return Err(Error::Numeric(format!(
                "transfer_ratio {} does not equal target_mse_no_tl/target_mse_tl {}",
                self.transfer_ratio,
                self.target_mse_no_tl / self.target_mse_tl
            )));
        }
        for (name, v) in [
            ("probe_accuracy_baseline", self.probe_accuracy_baseline),
            ("probe_accuracy_dannr", self.probe_accuracy_dannr),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Numeric(format!(
                    "{name} must lie in [0,1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Column means over a matrix of cells, mirroring the usual "Average" row of
/// transfer-result tables. `mean_transfer_ratio` is the mean of the
/// per-cell ratios — deliberately NOT the quotient of the mean MSEs, which
/// is a different number; each [`EvalReport`] keeps the exact-quotient
/// invariant instead, so the two summaries are kept as distinct types.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FleetAverage {
    pub cells: usize,
    pub source_mse_no_tl: f64,
    pub source_mse_tl: f64,
    pub target_mse_no_tl: f64,
    pub target_mse_tl: f64,
    pub mean_transfer_ratio: f64,
    pub probe_accuracy_baseline: f64,
    pub probe_accuracy_dannr: f64,
}

/// Averages a non-empty list of cells; see [`FleetAverage`].
pub fn fleet_average(reports: &[EvalReport]) -> Result<FleetAverage> {
    if reports.is_empty() {
        return Err(Error::Input("cannot average zero reports".into()));
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Ok(FleetAverage {
        cells: reports.len(),
        source_mse_no_tl: mean(|r| r.source_mse_no_tl),
        source_mse_tl: mean(|r| r.source_mse_tl),
        target_mse_no_tl: mean(|r| r.target_mse_no_tl),
        target_mse_tl: mean(|r| r.target_mse_tl),
        mean_transfer_ratio: mean(|r| r.transfer_ratio),
        probe_accuracy_baseline: mean(|r| r.probe_accuracy_baseline),
        probe_accuracy_dannr: mean(|r| r.probe_accuracy_dannr),
    })
}

/// Mean squared prediction error of the regression path over a labeled
/// dataset.
pub fn mse(model: &DannrModel, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Input("cannot compute MSE of an empty dataset".into()));
    }
    if ds.feature_dim() != model.input_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} features, model expects {}",
            ds.feature_dim(),
            model.input_dim()
        )));
    }
    let mut sum = 0.0;
    for s in ds.samples() {
        let y = s
            .target
            .ok_or_else(|| Error::Input("MSE needs a labeled dataset".into()))?;
        let d = model.predict(&s.features)? - y;
        sum += d * d;
    }
    Ok(sum / ds.len() as f64)
}

/// Mean discriminator log loss over both datasets combined, with samples
/// labeled by their *role* here (first argument source, second target) —
/// the `domain` field carried by the samples is ignored.
pub fn mean_domain_loss(model: &DannrModel, source: &Dataset, target: &Dataset) -> Result<f64> {
    for (name, ds) in [("source", source), ("target", target)] {
        if ds.is_empty() {
            return Err(Error::Input(format!("{name} dataset is empty")));
        }
        if ds.feature_dim() != model.input_dim() {
            return Err(Error::Shape(format!(
                "{name} dataset has {} features, model expects {}",
                ds.feature_dim(),
                model.input_dim()
            )));
        }
    }
    let mut sum = 0.0;
    for s in source.samples() {
        sum += domain_loss(model.discriminate(&s.features)?, DomainLabel::Source)?;
    }
    for s in target.samples() {
        sum += domain_loss(model.discriminate(&s.features)?, DomainLabel::Target)?;
    }
    Ok(sum / (source.len() + target.len()) as f64)
}

/// The headline score: how many times smaller the target-domain error
/// becomes with transfer. Both inputs must be positive.
pub fn transfer_ratio(mse_no_tl: f64, mse_tl: f64) -> Result<f64> {
    for (name, v) in [("mse_no_tl", mse_no_tl), ("mse_tl", mse_tl)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Input(format!(
                "transfer_ratio needs positive finite MSEs, {name} is {v}"
            )));
        }
    }
    Ok(mse_no_tl / mse_tl)
}

/// Fraction of 0.7/0.3 held-out samples a freshly trained logistic probe
/// classifies into the right domain, given only the model's *frozen*
/// extractor features. Classes are balanced by subsampling the larger
/// domain. 0.5 means the domains are indistinguishable to the probe; the
/// probe's own training (rate `cfg.mu`, `cfg.epochs` epochs, batches of
/// `cfg.batch_size`) uses a random stream derived from `cfg.seed`, so the
/// score is deterministic. Needs at least two samples per domain.
pub fn probe_domain_accuracy(
    model: &DannrModel,
    source: &Dataset,
    target: &Dataset,
    cfg: &TrainConfig,
) -> Result<f64> {
    cfg.validate()?;
    for (name, ds) in [("source", source), ("target", target)] {
        if ds.len() < 2 {
            return Err(Error::Input(format!(
                "the probe needs at least 2 {name} samples to hold some out"
            )));
        }
        if ds.feature_dim() != model.input_dim() {
            return Err(Error::Shape(format!(
                "{name} dataset has {} features, model expects {}",
                ds.feature_dim(),
                model.input_dim()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(cfg.seed, "probe"));

    let extract = |ds: &Dataset| -> Result<Vec<Vec<f64>>> {
        ds.samples().iter().map(|s| model.features(&s.features)).collect()
    };
    let feats_source = extract(source)?;
    let feats_target = extract(target)?;
    let m = feats_source.len().min(feats_target.len());
    // Train/test counts per class: 70% rounded, but always at least one of
    // each so the held-out accuracy is defined.
    let k = (((0.7 * m as f64) + 0.5) as usize).clamp(1, m - 1);

    let mut train: Vec<(&[f64], f64)> = Vec::with_capacity(2 * k);
    let mut test: Vec<(&[f64], f64)> = Vec::with_capacity(2 * (m - k));
    for (feats, label) in [(&feats_source, 0.0), (&feats_target, 1.0)] {
        let mut idx: Vec<usize> = (0..feats.len()).collect();
        idx.shuffle(&mut rng);
        for (rank, &i) in idx[..m].iter().enumerate() {
            let row = (feats[i].as_slice(), label);
            if rank < k {
                train.push(row);
            } else {
                test.push(row);
            }
        }
    }

    // Fresh logistic head on the frozen features, plain minibatch SGD. The
    // log loss through a sigmoid gives (p - label) at the pre-activation.
    let dim = model.feature_dim();
    let mut head = crate::layer::DenseLayer::seeded(
        dim,
        1,
        crate::layer::Activation::Sigmoid,
        &mut rng,
    );
    let mut grad_w = Matrix::zeros(1, dim);
    let mut grad_b = [0.0];
    let mut order: Vec<usize> = (0..train.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            grad_w.fill_zero();
            grad_b[0] = 0.0;
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let (x, label) = train[i];
                let p = head.forward(x)?[0];
                let dz = scale * (p - label);
                grad_w.add_scaled_outer(&[dz], x, 1.0);
                grad_b[0] += dz;
            }
            head.add_scaled(&grad_w, &grad_b, -cfg.mu);
        }
    }

    let mut correct = 0usize;
    for &(x, label) in &test {
        let p = head.forward(x)?[0];
        let predicted_target = p >= 0.5;
        if predicted_target == (label == 1.0) {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Canonical digest of everything that determines a cell's outcome besides
/// the fleet data itself, for stamping into reports and checkpoint files.
pub fn config_digest(shape: &ModelShape, cfg: &TrainConfig, mode: MatrixMode) -> String {
    let repr = format!(
        "input={};layers={:?};mu={};schedule={};epochs={};batch={};seed={};shuffle={};mode={}",
        shape.input_dim,
        shape.feature_layers,
        cfg.mu,
        cfg.lambda_schedule,
        cfg.epochs,
        cfg.batch_size,
        cfg.seed,
        cfg.shuffle,
        mode
    );
    format!("{:016x}", seeds::fnv1a64(repr.as_bytes()))
}

/// Runs one cell of the experiment matrix: plant `target` is the target
/// domain, the source domain is chosen per `mode`, and both trainers run
/// from the same seed on source-normalized data. The adversarial trainer
/// sees the target set with labels removed; target labels are only used
/// here, to score the final models.
pub fn run_matrix_cell(
    fleet: &[Dataset],
    mode: MatrixMode,
    target: usize,
    shape: &ModelShape,
    cfg: &TrainConfig,
) -> Result<EvalReport> {
    if fleet.len() < 2 {
        return Err(Error::Input(format!(
            "the experiment matrix needs at least 2 plants, got {}",
            fleet.len()
        )));
    }
    if target >= fleet.len() {
        return Err(Error::Input(format!(
            "target plant {target} out of range, fleet has {}",
            fleet.len()
        )));
    }
    let source_raw = match mode {
        MatrixMode::OneToOne => fleet[(target + 1) % fleet.len()].clone(),
        MatrixMode::RestToOne => {
            let others: Vec<&Dataset> = fleet
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != target)
                .map(|(_, ds)| ds)
                .collect();
            Dataset::pool(&others)?
        }
    };

    let norm = fit_normalizer(&source_raw)?;
    let source = apply_normalizer(&norm, &source_raw)?;
    let target_labeled = apply_normalizer(&norm, &fleet[target])?;
    let target_unlabeled = target_labeled.without_targets();

    let (baseline, _) = train_baseline(shape, &source, cfg)?;
    let (dannr, _) = train_dannr(
        init_model(shape, cfg.seed)?,
        &source,
        &target_unlabeled,
        cfg,
    )?;

    let target_mse_no_tl = mse(&baseline, &target_labeled)?;
    let target_mse_tl = mse(&dannr, &target_labeled)?;
    let report = EvalReport {
        target_name: fleet[target].origin().to_string(),
        source_name: source_raw.origin().to_string(),
        source_mse_no_tl: mse(&baseline, &source)?,
        source_mse_tl: mse(&dannr, &source)?,
        target_mse_no_tl,
        target_mse_tl,
        transfer_ratio: transfer_ratio(target_mse_no_tl, target_mse_tl)?,
        probe_accuracy_baseline: probe_domain_accuracy(&baseline, &source, &target_unlabeled, cfg)?,
        probe_accuracy_dannr: probe_domain_accuracy(&dannr, &source, &target_unlabeled, cfg)?,
        seed: cfg.seed,
        config_digest: config_digest(shape, cfg, mode),
    };
    report.validate()?;
    Ok(report)
}

/// Evaluates every plant as the target domain once (cells in plant order).
pub fn run_experiment_matrix(
    fleet: &[Dataset],
    mode: MatrixMode,
    shape: &ModelShape,
    cfg: &TrainConfig,
) -> Result<Vec<EvalReport>> {
    (0..fleet.len())
        .map(|t| run_matrix_cell(fleet, mode, t, shape, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::fleet::{generate_fleet, FleetSpec};
    use crate::layer::{Activation, DenseLayer};
    use crate::schedule::LambdaSchedule;
    use alloc::vec;

    fn constant_model(bias: f64) -> DannrModel {
        let net_f = vec![DenseLayer::new(
            Matrix::new(1, 1, vec![0.3]).unwrap(),
            vec![0.0],
            Activation::Sigmoid,
        )
        .unwrap()];
        let net_r = DenseLayer::new(
            Matrix::new(1, 1, vec![0.0]).unwrap(),
            vec![bias],
            Activation::Identity,
        )
        .unwrap();
        let net_d = DenseLayer::new(
            Matrix::new(1, 1, vec![0.0]).unwrap(),
            vec![0.0],
            Activation::Sigmoid,
        )
        .unwrap();
        DannrModel::new(net_f, net_r, net_d).unwrap()
    }

    fn labeled_1d(rows: &[(f64, f64)], origin: &str) -> Dataset {
        let mut ds = Dataset::new(
            vec!["x".to_string()],
            "y".to_string(),
            origin.to_string(),
        )
        .unwrap();
        for &(x, y) in rows {
            ds.push(Sample {
                features: vec![x],
                target: Some(y),
                domain: DomainLabel::Source,
            })
            .unwrap();
        }
        ds
    }

    #[test]
    fn mse_matches_hand_arithmetic() {
        let m = constant_model(0.37);
        let ds = labeled_1d(&[(0.5, 0.3), (0.2, 0.5)], "a");
        // Errors 0.07 and -0.13 → (0.0049 + 0.0169) / 2.
        let got = mse(&m, &ds).unwrap();
        assert!((got - 0.0109).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn mean_domain_loss_of_a_blind_discriminator_is_ln_2() {
        let m = constant_model(0.0);
        let a = labeled_1d(&[(0.1, 0.0), (0.9, 0.0)], "a");
        let b = labeled_1d(&[(0.4, 0.0)], "b");
        let got = mean_domain_loss(&m, &a, &b).unwrap();
        assert!((got - core::f64::consts::LN_2).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn transfer_ratio_is_the_exact_quotient() {
        assert_eq!(transfer_ratio(0.0112, 0.0031).unwrap(), 0.0112 / 0.0031);
        assert!((transfer_ratio(0.0112, 0.0031).unwrap() - 3.61).abs() < 0.02);
        assert!(matches!(transfer_ratio(0.0, 0.1), Err(Error::Input(_))));
        assert!(matches!(transfer_ratio(0.1, 0.0), Err(Error::Input(_))));
        assert!(matches!(transfer_ratio(0.1, f64::NAN), Err(Error::Input(_))));
    }

    #[test]
    fn fleet_average_means_each_column_and_averages_ratios() {
        let cell = |no_tl: f64, tl: f64| EvalReport {
            target_name: "t".into(),
            source_name: "s".into(),
            source_mse_no_tl: 0.01,
            source_mse_tl: 0.02,
            target_mse_no_tl: no_tl,
            target_mse_tl: tl,
            transfer_ratio: no_tl / tl,
            probe_accuracy_baseline: 0.9,
            probe_accuracy_dannr: 0.6,
            seed: 1,
            config_digest: "x".into(),
        };
        // Ratios 2 and 4 → mean ratio 3; quotient of mean MSEs would be
        // 0.05/0.0175 ≈ 2.857, a different number.
        let reports = [cell(0.08, 0.04), cell(0.02, 0.005)];
        let avg = fleet_average(&reports).unwrap();
        assert_eq!(avg.cells, 2);
        assert_eq!(avg.mean_transfer_ratio, 3.0);
        assert_eq!(avg.target_mse_no_tl, 0.05);
        assert!((avg.target_mse_tl - 0.0225).abs() < 1e-18);
        assert_ne!(avg.mean_transfer_ratio, avg.target_mse_no_tl / avg.target_mse_tl);
        assert!(matches!(fleet_average(&[]), Err(Error::Input(_))));
    }

    #[test]
    fn report_validation_catches_inconsistent_ratios() {
        let mut r = EvalReport {
            target_name: "t".into(),
            source_name: "s".into(),
            source_mse_no_tl: 0.01,
            source_mse_tl: 0.02,
            target_mse_no_tl: 0.03,
            target_mse_tl: 0.01,
            transfer_ratio: 0.03 / 0.01,
            probe_accuracy_baseline: 0.9,
            probe_accuracy_dannr: 0.6,
            seed: 1,
            config_digest: "x".into(),
        };
        r.validate().unwrap();
        r.transfer_ratio = 3.0000001;
        assert!(matches!(r.validate(), Err(Error::Numeric(_))));
    }

    /// A 1→1 extractor saturating at 0 or 1 makes the two domains linearly
    /// separable in feature space.
    #[test]
    fn probe_separates_hand_built_separable_features() {
        let net_f = vec![DenseLayer::new(
            Matrix::new(1, 1, vec![20.0]).unwrap(),
            vec![-10.0],
            Activation::Sigmoid,
        )
        .unwrap()];
        let net_r = DenseLayer::new(
            Matrix::new(1, 1, vec![0.0]).unwrap(),
            vec![0.0],
            Activation::Identity,
        )
        .unwrap();
        let net_d = DenseLayer::new(
            Matrix::new(1, 1, vec![0.0]).unwrap(),
            vec![0.0],
            Activation::Sigmoid,
        )
        .unwrap();
        let m = DannrModel::new(net_f, net_r, net_d).unwrap();

        let source = labeled_1d(
            &(0..30).map(|i| (i as f64 / 150.0, 0.0)).collect::<Vec<_>>(),
            "low",
        );
        let target = labeled_1d(
            &(0..30).map(|i| (0.8 + i as f64 / 150.0, 0.0)).collect::<Vec<_>>(),
            "high",
        );
        let cfg = TrainConfig {
            mu: 0.5,
            epochs: 200,
            batch_size: 8,
            seed: 5,
            ..TrainConfig::default()
        };
        let acc = probe_domain_accuracy(&m, &source, &target, &cfg).unwrap();
        assert!(acc > 0.95, "separable features should be probed apart, got {acc}");
        // Determinism.
        assert_eq!(acc, probe_domain_accuracy(&m, &source, &target, &cfg).unwrap());
    }

    #[test]
    fn probe_is_near_chance_on_identical_domains() {
        let m = constant_model(0.0);
        let rows: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 / 40.0, 0.0)).collect();
        let a = labeled_1d(&rows, "a");
        let b = labeled_1d(&rows, "b");
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 8,
            seed: 2,
            ..TrainConfig::default()
        };
        let acc = probe_domain_accuracy(&m, &a, &b, &cfg).unwrap();
        assert!(
            (acc - 0.5).abs() <= 0.2,
            "identical domains should look near-chance, got {acc}"
        );
    }

    #[test]
    fn probe_rejects_undersized_domains() {
        let m = constant_model(0.0);
        let tiny = labeled_1d(&[(0.1, 0.0)], "tiny");
        let ok = labeled_1d(&[(0.1, 0.0), (0.2, 0.0)], "ok");
        assert!(matches!(
            probe_domain_accuracy(&m, &tiny, &ok, &TrainConfig::default()),
            Err(Error::Input(_))
        ));
    }

    fn quick_cfg(seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 16,
            seed,
            lambda_schedule: LambdaSchedule::Constant { value: 0.5 },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn experiment_matrix_covers_every_plant_in_both_modes() {
        let spec = FleetSpec {
            n_plants: 3,
            perturbations: FleetSpec::default().perturbations[..3].to_vec(),
            samples_per_plant: 60,
            ..FleetSpec::default()
        };
        let fleet = generate_fleet(&spec).unwrap();
        let shape = ModelShape::new(4, vec![6]);
        let cfg = quick_cfg(1);

        let one = run_experiment_matrix(&fleet, MatrixMode::OneToOne, &shape, &cfg).unwrap();
        assert_eq!(one.len(), 3);
        for (t, r) in one.iter().enumerate() {
            assert_eq!(r.target_name, format!("plant-{t}"));
            assert_eq!(r.source_name, format!("plant-{}", (t + 1) % 3));
            r.validate().unwrap();
            assert_eq!(r.config_digest, one[0].config_digest);
        }

        let rest = run_experiment_matrix(&fleet, MatrixMode::RestToOne, &shape, &cfg).unwrap();
        assert_eq!(rest.len(), 3);
        assert_eq!(rest[0].source_name, "plant-1+plant-2");
        assert_eq!(rest[1].source_name, "plant-0+plant-2");
        assert_ne!(rest[0].config_digest, one[0].config_digest);

        // The smallest possible fleet yields exactly two cells.
        let two = run_experiment_matrix(&fleet[..2], MatrixMode::OneToOne, &shape, &cfg).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].source_name, "plant-1");
        assert_eq!(two[1].source_name, "plant-0");
    }

    #[test]
    fn matrix_cells_validate_their_arguments() {
        let spec = FleetSpec {
            samples_per_plant: 30,
            ..FleetSpec::default()
        };
        let fleet = generate_fleet(&spec).unwrap();
        let shape = ModelShape::new(4, vec![4]);
        let cfg = quick_cfg(1);
        assert!(matches!(
            run_matrix_cell(&fleet, MatrixMode::OneToOne, 99, &shape, &cfg),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            run_matrix_cell(&fleet[..1], MatrixMode::OneToOne, 0, &shape, &cfg),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn mode_strings_round_trip() {
        for mode in [MatrixMode::OneToOne, MatrixMode::RestToOne] {
            let parsed: MatrixMode = mode.as_str().parse().unwrap();
            assert_eq!(parsed, mode);
        }
        assert!(matches!(
            "sideways".parse::<MatrixMode>(),
            Err(Error::Config(_))
        ));
    }
}
