//! Fully connected layer with the two activations the model needs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::fmath;
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Largest `f64` strictly below 1.0; upper guard for sigmoid outputs.
const ONE_BELOW_1: f64 = 1.0 - f64::EPSILON / 2.0;

/// Numerically stable logistic function. The two branches avoid evaluating
/// `exp` on large positive arguments; the final guard keeps the result
/// strictly inside (0, 1) even when the input saturates past the rounding
/// threshold (|x| ≳ 37), so downstream log-losses never see exactly 0 or 1.
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + fmath::exp(-x))
    } else {
        let e = fmath::exp(x);
        e / (1.0 + e)
    };
    s.max(f64::MIN_POSITIVE).min(ONE_BELOW_1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's own output, which is
    /// what the backward pass has at hand.
    pub fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Identity => 1.0,
        }
    }
}

/// Dense layer `activation(W x + b)` with `W` stored row-major as
/// `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawDenseLayer", into = "RawDenseLayer"))]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape(format!(
                "bias length {} does not match {} output rows",
                bias.len(),
                weights.rows()
            )));
        }
        if let Some(bad) = bias.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "bias entry {bad} is not finite: {}",
                bias[bad]
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Random initialization: weights uniform in `(-1/sqrt(in_dim),
    /// +1/sqrt(in_dim))`, biases zero so pre-activations start centered.
    pub fn seeded<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        assert!(in_dim > 0 && out_dim > 0, "layer dimensions must be positive");
        let bound = 1.0 / fmath::sqrt(in_dim as f64);
        let mut data = Vec::with_capacity(out_dim * in_dim);
        for _ in 0..out_dim * in_dim {
            data.push(rng.random_range(-bound..bound));
        }
        Self {
            weights: Matrix::new(out_dim, in_dim, data).expect("init weights are finite"),
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Raw weight storage in row-major order; callers are responsible for
    /// keeping the values finite.
    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        self.weights.as_mut_slice()
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// `activation(W input + b)`.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "layer expects {} inputs, got {}",
                self.in_dim(),
                input.len()
            )));
        }
        let mut out = self.weights.matvec(input);
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o = self.activation.apply(*o + *b);
        }
        Ok(out)
    }

    /// `self.weights += factor * delta_w; self.bias += factor * delta_b`.
    /// This is the SGD update primitive; callers pass `factor = -mu`.
    pub fn add_scaled(&mut self, delta_w: &Matrix, delta_b: &[f64], factor: f64) {
        self.weights.add_scaled(delta_w, factor);
        assert_eq!(delta_b.len(), self.bias.len(), "bias update length mismatch");
        for (b, d) in self.bias.iter_mut().zip(delta_b) {
            *b += factor * d;
        }
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawDenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

#[cfg(feature = "serde")]
impl TryFrom<RawDenseLayer> for DenseLayer {
    type Error = String;

    fn try_from(raw: RawDenseLayer) -> core::result::Result<Self, String> {
        DenseLayer::new(raw.weights, raw.bias, raw.activation).map_err(|e| format!("{e}"))
    }
}

#[cfg(feature = "serde")]
impl From<DenseLayer> for RawDenseLayer {
    fn from(l: DenseLayer) -> Self {
        RawDenseLayer {
            weights: l.weights,
            bias: l.bias,
            activation: l.activation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_values_through() {
        let layer = DenseLayer::new(
            Matrix::new(1, 1, vec![1.0]).unwrap(),
            vec![0.0],
            Activation::Identity,
        )
        .unwrap();
        assert_eq!(layer.forward(&[3.0]).unwrap(), vec![3.0]);
        assert_eq!(layer.forward(&[-1.0]).unwrap(), vec![-1.0]);
    }

    #[test]
    fn sigmoid_known_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        // 1/(1+e^-1), frozen from an independent high-precision evaluation.
        assert!((sigmoid(1.0) - 0.7310585786300049).abs() < 1e-12);
        assert!((sigmoid(-1.0) - (1.0 - 0.7310585786300049)).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_is_strictly_inside_unit_interval() {
        for x in [-1e9, -745.0, -40.0, 0.0, 36.9, 745.0, 1e9] {
            let s = sigmoid(x);
            assert!(s > 0.0 && s < 1.0, "sigmoid({x}) = {s} escaped (0,1)");
        }
    }

    #[test]
    fn sigmoid_is_monotone_on_a_grid() {
        let mut prev = sigmoid(-30.0);
        let mut x = -30.0;
        while x < 30.0 {
            x += 0.25;
            let s = sigmoid(x);
            assert!(s >= prev, "sigmoid not monotone at {x}");
            prev = s;
        }
    }

    #[test]
    fn seeded_init_respects_fan_in_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let layer = DenseLayer::seeded(16, 8, Activation::Sigmoid, &mut rng);
        let bound = 1.0 / (16.0f64).sqrt();
        for &w in layer.weights().as_slice() {
            assert!(w > -bound && w < bound, "weight {w} outside ±{bound}");
        }
        assert!(layer.bias().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let la = DenseLayer::seeded(5, 4, Activation::Sigmoid, &mut a);
        let lb = DenseLayer::seeded(5, 4, Activation::Sigmoid, &mut b);
        assert_eq!(la, lb);
    }

    #[test]
    fn forward_rejects_wrong_arity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layer = DenseLayer::seeded(3, 2, Activation::Identity, &mut rng);
        let err = layer.forward(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, crate::Error::Shape(_)), "got {err:?}");
    }
}
