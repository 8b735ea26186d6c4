//! Reverse-mode differentiation over an explicitly recorded op sequence.
//!
//! The op vocabulary is deliberately closed — dense layers and the
//! gradient-reversal stage — so every adjoint rule in [`Tape::backward`] can
//! be audited against the forward code next to it. A tape records one forward
//! chain; the backward pass walks the ops in exact reverse order and
//! accumulates parameter gradients into a [`GradientSet`] indexed by the same
//! layer ids the caller used during the forward pass.

use alloc::format;
use alloc::vec::Vec;

use crate::layer::DenseLayer;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Per-layer gradient buffers, shaped like the layer they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients for a family of layers, indexed by the caller's layer ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    layers: Vec<LayerGrad>,
}

impl GradientSet {
    /// Zero-initialized gradients matching `layers` (id = slice position).
    pub fn for_layers(layers: &[&DenseLayer]) -> Self {
        let layers = layers
            .iter()
            .map(|l| LayerGrad {
                weights: Matrix::zeros(l.out_dim(), l.in_dim()),
                bias: alloc::vec![0.0; l.out_dim()],
            })
            .collect();
        Self { layers }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn layer(&self, id: usize) -> &LayerGrad {
        &self.layers[id]
    }

    pub fn layer_mut(&mut self, id: usize) -> &mut LayerGrad {
        &mut self.layers[id]
    }

    /// `self += factor * other`; both sets must have identical shapes.
    pub fn add_scaled(&mut self, other: &GradientSet, factor: f64) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient set size mismatch");
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_scaled(&b.weights, factor);
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += factor * y;
            }
        }
    }

    pub fn zero(&mut self) {
        for l in &mut self.layers {
            l.weights.fill_zero();
            l.bias.fill(0.0);
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Dense {
        layer_id: usize,
        input: Vec<f64>,
        output: Vec<f64>,
    },
    GradReverse {
        lambda: f64,
    },
}

/// Ordered record of one forward chain.
#[derive(Debug, Default)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops the recorded chain; call before reusing the tape for a fresh
    /// forward pass. Keeps the allocation.
    pub fn reset(&mut self) {
        self.ops.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Runs `layer` on `input` and records the op under `layer_id`, which
    /// must index the same layer in the slices later given to [`backward`].
    ///
    /// [`backward`]: Tape::backward
    pub fn dense_forward(
        &mut self,
        layer: &DenseLayer,
        layer_id: usize,
        input: &[f64],
    ) -> Result<Vec<f64>> {
        let output = layer.forward(input)?;
        self.ops.push(Op::Dense {
            layer_id,
            input: input.to_vec(),
            output: output.clone(),
        });
        Ok(output)
    }

    /// Identity in the forward direction — the returned vector is
    /// bit-identical to `input` — while the backward pass multiplies the
    /// adjoint flowing through by `-lambda`. With `lambda = 0` everything
    /// upstream receives exactly zero gradient.
    pub fn grad_reverse(&mut self, input: &[f64], lambda: f64) -> Result<Vec<f64>> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "gradient reversal needs a finite lambda >= 0, got {lambda}"
            )));
        }
        self.ops.push(Op::GradReverse { lambda });
        Ok(input.to_vec())
    }

    /// Walks the recorded ops in reverse, seeding the chain output with
    /// `seed_adjoint`, accumulating parameter gradients into `grads`
    /// (shapes from [`GradientSet::for_layers`] over the same `layers`
    /// slice), and returning the adjoint of the chain input.
    ///
    /// The pass is read-only on the tape: running it twice with the same
    /// seed produces identical gradients.
    pub fn backward(
        &self,
        layers: &[&DenseLayer],
        seed_adjoint: &[f64],
        grads: &mut GradientSet,
    ) -> Result<Vec<f64>> {
        let last = self.ops.last().ok_or_else(|| {
            Error::State("backward called before any forward op was recorded".into())
        })?;
        let out_len = match last {
            Op::Dense { output, .. } => output.len(),
            // A reversal keeps the width of whatever preceded it; for a tape
            // that begins with one, the seed defines the width.
            Op::GradReverse { .. } => seed_adjoint.len(),
        };
        if seed_adjoint.len() != out_len {
            return Err(Error::Shape(format!(
                "seed adjoint length {} does not match chain output length {out_len}",
                seed_adjoint.len()
            )));
        }

        let mut adjoint = seed_adjoint.to_vec();
        for op in self.ops.iter().rev() {
            match op {
                Op::Dense {
                    layer_id,
                    input,
                    output,
                } => {
                    let layer = layers.get(*layer_id).ok_or_else(|| {
                        Error::Shape(format!("layer id {layer_id} not present in layer table"))
                    })?;
                    if adjoint.len() != output.len() {
                        return Err(Error::Shape(format!(
                            "adjoint length {} does not match layer {layer_id} output {}",
                            adjoint.len(),
                            output.len()
                        )));
                    }
                    // d(loss)/d(pre-activation): chain through the activation.
                    let mut dz = adjoint;
                    for (a, o) in dz.iter_mut().zip(output) {
                        *a *= layer.activation().derivative_from_output(*o);
                    }
                    let g = grads.layer_mut(*layer_id);
                    g.weights.add_scaled_outer(&dz, input, 1.0);
                    for (b, d) in g.bias.iter_mut().zip(&dz) {
                        *b += *d;
                    }
                    adjoint = layer.weights().matvec_transpose(&dz);
                }
                Op::GradReverse { lambda } => {
                    for a in adjoint.iter_mut() {
                        *a *= -lambda;
                    }
                }
            }
        }
        Ok(adjoint)
    }
}
