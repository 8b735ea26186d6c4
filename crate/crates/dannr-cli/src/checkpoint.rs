//! Model checkpoints: a self-describing JSON document holding the
//! architecture, every weight matrix and bias vector (row-major), the
//! normalization statistics fitted on the training source, and the exact
//! training configuration.
//!
//! Floats are written as shortest-round-trip decimals, so loading a
//! checkpoint reproduces the saved model bit for bit, and identical training
//! runs produce byte-identical files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dannr_core::{DannrModel, DenseLayer, ModelShape, NormStats, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::jsonio;
use crate::runconfig::TrainMode;

/// Format marker; bumped only on incompatible layout changes.
pub const CHECKPOINT_FORMAT: &str = "dannr-checkpoint/1";

/// Everything needed to reload and rerun a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    /// Must equal [`CHECKPOINT_FORMAT`].
    pub format: String,
    /// Which trainer produced the weights.
    pub mode: TrainMode,
    /// Architecture descriptor (input width, hidden widths).
    pub shape: ModelShape,
    /// Feature-extractor layers, input to output.
    pub feature_layers: Vec<DenseLayer>,
    /// Regression head.
    pub regressor: DenseLayer,
    /// Domain-discriminator head.
    pub discriminator: DenseLayer,
    /// Min-max statistics fitted on the source the model was trained with;
    /// evaluation must apply these, never refit.
    pub norm: NormStats,
    /// The exact trainer configuration of the producing run.
    pub train: TrainConfig,
}

impl Checkpoint {
    /// Snapshots a trained model together with its provenance.
    pub fn new(mode: TrainMode, model: &DannrModel, norm: NormStats, train: TrainConfig) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            mode,
            shape: model.shape(),
            feature_layers: model.feature_layers().to_vec(),
            regressor: model.regressor().clone(),
            discriminator: model.discriminator().clone(),
            norm,
            train,
        }
    }

    /// Rebuilds the model, re-validating the architecture contract and the
    /// declared shape.
    pub fn to_model(&self) -> Result<DannrModel> {
        let model = DannrModel::new(
            self.feature_layers.clone(),
            self.regressor.clone(),
            self.discriminator.clone(),
        )
        .context("checkpoint layers violate the architecture contract")?;
        if model.shape() != self.shape {
            bail!(
                "checkpoint shape {:?} does not match its layers {:?}",
                self.shape,
                model.shape()
            );
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonio::write_json(path, self)
    }

    /// Loads and verifies a checkpoint; a wrong or missing format marker is
    /// a schema mismatch and fails loudly.
    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Checkpoint = jsonio::read_json(path)
            .with_context(|| format!("checkpoint schema mismatch in {}", path.display()))?;
        if ckpt.format != CHECKPOINT_FORMAT {
            bail!(
                "checkpoint schema mismatch in {}: format {:?}, this build reads {:?}",
                path.display(),
                ckpt.format,
                CHECKPOINT_FORMAT
            );
        }
        ckpt.to_model()
            .with_context(|| format!("checkpoint schema mismatch in {}", path.display()))?;
        Ok(ckpt)
    }
}
