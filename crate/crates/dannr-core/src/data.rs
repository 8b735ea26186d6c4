//! Datasets, domain labels, source-fitted min-max normalization, splitting.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Which side of the transfer a sample belongs to. The indicator convention
/// is source = 0, target = 1, matching what the domain discriminator is
/// trained to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DomainLabel {
    Source,
    Target,
}

impl DomainLabel {
    pub fn indicator(self) -> f64 {
        match self {
            DomainLabel::Source => 0.0,
            DomainLabel::Target => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainLabel::Source => "source",
            DomainLabel::Target => "target",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "source" => Some(DomainLabel::Source),
            "target" => Some(DomainLabel::Target),
            _ => None,
        }
    }
}

/// One observation. `target` is `None` for unlabeled data (the target domain
/// during training). `domain` records what the data carrier claims; training
/// and evaluation assign source/target roles positionally and never read it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub target: Option<f64>,
    pub domain: DomainLabel,
}

/// Per-column min-max statistics fitted on the source domain only.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormStats {
    /// `(min, max)` per feature column.
    pub feature_ranges: Vec<(f64, f64)>,
    /// `(min, max)` of the target column.
    pub target_range: (f64, f64),
}

impl NormStats {
    pub fn normalize_target(&self, y: f64) -> f64 {
        let (lo, hi) = self.target_range;
        (y - lo) / (hi - lo)
    }

    pub fn denormalize_target(&self, y: f64) -> f64 {
        let (lo, hi) = self.target_range;
        lo + y * (hi - lo)
    }
}

/// A named column-oriented collection of samples with uniform arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    target_name: String,
    origin: String,
    samples: Vec<Sample>,
    applied_norm: Option<NormStats>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, target_name: String, origin: String) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::Config("dataset needs at least one feature column".into()));
        }
        Ok(Self {
            feature_names,
            target_name,
            origin,
            samples: Vec::new(),
            applied_norm: None,
        })
    }

    /// Appends a sample after checking arity and finiteness.
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if sample.features.len() != self.feature_names.len() {
            return Err(Error::Shape(format!(
                "sample has {} features, dataset '{}' expects {}",
                sample.features.len(),
                self.origin,
                self.feature_names.len()
            )));
        }
        if let Some(bad) = sample.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "feature '{}' is not finite: {}",
                self.feature_names[bad], sample.features[bad]
            )));
        }
        if let Some(y) = sample.target {
            if !y.is_finite() {
                return Err(Error::Numeric(format!(
                    "target '{}' is not finite: {y}",
                    self.target_name
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    /// The normalization stats that produced this dataset's values, if any.
    pub fn applied_norm(&self) -> Option<&NormStats> {
        self.applied_norm.as_ref()
    }

    pub fn all_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.target.is_some())
    }

    /// Copy with every target removed. The adversarial trainer runs the
    /// target domain through this so label access is impossible by
    /// construction, not by discipline.
    pub fn without_targets(&self) -> Dataset {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.target = None;
        }
        out
    }

    /// Copy with every sample relabeled to `domain`.
    pub fn with_domain(&self, domain: DomainLabel) -> Dataset {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.domain = domain;
        }
        out
    }

    /// Concatenates datasets with identical column schemas; origins join
    /// with `+`.
    pub fn pool(parts: &[&Dataset]) -> Result<Dataset> {
        let &first = parts
            .first()
            .ok_or_else(|| Error::Input("cannot pool zero datasets".into()))?;
        let mut out = first.clone();
        let mut origin = String::from(first.origin());
        for part in &parts[1..] {
            if part.feature_names != first.feature_names || part.target_name != first.target_name {
                return Err(Error::Shape(format!(
                    "cannot pool '{}' with '{}': column schemas differ",
                    part.origin, first.origin
                )));
            }
            out.samples.extend(part.samples.iter().cloned());
            origin.push('+');
            origin.push_str(part.origin());
        }
        out.origin = origin;
        Ok(out)
    }
}

/// Fits per-column min-max ranges on `source`. Every sample must be labeled
/// (the target range comes from the same pass). A constant column cannot be
/// scaled and is a config error naming the column.
pub fn fit_normalizer(source: &Dataset) -> Result<NormStats> {
    if source.is_empty() {
        return Err(Error::Input("cannot fit normalizer on an empty dataset".into()));
    }
    let dim = source.feature_dim();
    let mut feature_ranges = alloc::vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    let mut target_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, s) in source.samples().iter().enumerate() {
        for (r, v) in feature_ranges.iter_mut().zip(&s.features) {
            r.0 = r.0.min(*v);
            r.1 = r.1.max(*v);
        }
        let y = s.target.ok_or_else(|| {
            Error::Input(format!("cannot fit target range: sample {i} has no label"))
        })?;
        target_range.0 = target_range.0.min(y);
        target_range.1 = target_range.1.max(y);
    }
    for (c, (lo, hi)) in feature_ranges.iter().enumerate() {
        if lo >= hi {
            return Err(Error::Config(format!(
                "feature column '{}' is constant at {lo}; min-max scaling is undefined",
                source.feature_names()[c]
            )));
        }
    }
    if target_range.0 >= target_range.1 {
        return Err(Error::Config(format!(
            "target column '{}' is constant at {}; min-max scaling is undefined",
            source.target_name(),
            target_range.0
        )));
    }
    Ok(NormStats {
        feature_ranges,
        target_range,
    })
}

/// Applies `stats` to every column: `x' = (x - min) / (max - min)`.
/// Values outside the fitted range pass through unclamped, so a shifted
/// domain keeps its shift. The result records the stats used.
pub fn apply_normalizer(stats: &NormStats, ds: &Dataset) -> Result<Dataset> {
    if stats.feature_ranges.len() != ds.feature_dim() {
        return Err(Error::Shape(format!(
            "normalizer has {} columns, dataset '{}' has {}",
            stats.feature_ranges.len(),
            ds.origin(),
            ds.feature_dim()
        )));
    }
    let mut out = ds.clone();
    for s in &mut out.samples {
        for (v, (lo, hi)) in s.features.iter_mut().zip(&stats.feature_ranges) {
            *v = (*v - lo) / (hi - lo);
        }
        if let Some(y) = s.target.as_mut() {
            *y = stats.normalize_target(*y);
        }
    }
    out.applied_norm = Some(stats.clone());
    Ok(out)
}

/// Splits `ds` into two disjoint parts by a seeded permutation; the first
/// holds `round(len * fraction)` samples.
pub fn split(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "split fraction must be strictly between 0 and 1, got {fraction}"
        )));
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let k = ((n as f64) * fraction + 0.5) as usize;
    let k = k.min(n);
    let mut first = ds.clone();
    let mut second = ds.clone();
    first.samples = order[..k].iter().map(|&i| ds.samples[i].clone()).collect();
    second.samples = order[k..].iter().map(|&i| ds.samples[i].clone()).collect();
    Ok((first, second))
}
