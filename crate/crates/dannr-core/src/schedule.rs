//! Epoch schedules for the adversarial weight λ.

use alloc::format;

use crate::fmath;
use crate::{Error, Result};

/// How the adversarial weight evolves over training. All variants yield
/// finite values ≥ 0 for every epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LambdaSchedule {
    /// λ fixed at `value` for the whole run.
    Constant { value: f64 },
    /// Linear interpolation from `start` (first epoch) to `end` (last
    /// epoch). Works in either direction; the shipped default decays.
    LinearDecay { start: f64, end: f64 },
    /// `scale * (2 / (1 + e^(-10 p)) - 1)` over progress `p ∈ [0, 1]`:
    /// starts at exactly zero and saturates near `scale`.
    DannRamp { scale: f64 },
}

impl LambdaSchedule {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "lambda schedule {name} must be finite and >= 0, got {v}"
                )))
            }
        };
        match *self {
            LambdaSchedule::Constant { value } => check("value", value),
            LambdaSchedule::LinearDecay { start, end } => {
                check("start", start)?;
                check("end", end)
            }
            LambdaSchedule::DannRamp { scale } => check("scale", scale),
        }
    }

    /// λ for `epoch` (0-based) out of `total_epochs`.
    pub fn lambda_at(&self, epoch: usize, total_epochs: usize) -> Result<f64> {
        self.validate()?;
        if total_epochs == 0 {
            return Err(Error::Config("lambda_at needs total_epochs >= 1".into()));
        }
        if epoch >= total_epochs {
            return Err(Error::Config(format!(
                "epoch {epoch} out of range for {total_epochs} epochs"
            )));
        }
        // A single-epoch run sits at the start of the schedule.
        let p = if total_epochs == 1 {
            0.0
        } else {
            epoch as f64 / (total_epochs - 1) as f64
        };
        Ok(match *self {
            LambdaSchedule::Constant { value } => value,
            LambdaSchedule::LinearDecay { start, end } => start + (end - start) * p,
            LambdaSchedule::DannRamp { scale } => scale * (2.0 / (1.0 + fmath::exp(-10.0 * p)) - 1.0),
        })
    }
}

/// Canonical single-line rendering, used when hashing resolved configs.
/// Numbers print in Rust's shortest-round-trip form, so distinct schedules
/// render distinctly.
impl core::fmt::Display for LambdaSchedule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LambdaSchedule::Constant { value } => write!(f, "constant({value})"),
            LambdaSchedule::LinearDecay { start, end } => {
                write!(f, "linear_decay({start},{end})")
            }
            LambdaSchedule::DannRamp { scale } => write!(f, "dann_ramp({scale})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn linear_decay_hits_the_stated_grid() {
        let s = LambdaSchedule::LinearDecay { start: 1.0, end: 0.0 };
        let got: Vec<f64> = (0..5).map(|e| s.lambda_at(e, 5).unwrap()).collect();
        assert_eq!(got, [1.0, 0.75, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn constant_is_constant() {
        let s = LambdaSchedule::Constant { value: 0.3 };
        for e in 0..7 {
            assert_eq!(s.lambda_at(e, 7).unwrap(), 0.3);
        }
    }

    #[test]
    fn ramp_starts_at_zero_and_saturates() {
        let s = LambdaSchedule::DannRamp { scale: 1.0 };
        assert_eq!(s.lambda_at(0, 100).unwrap(), 0.0);
        // 2/(1+e^-10) - 1, frozen from an independent evaluation.
        let last = s.lambda_at(99, 100).unwrap();
        assert!((last - 0.9999092042625952).abs() < 1e-12, "got {last}");
    }

    #[test]
    fn single_epoch_run_uses_the_schedule_start() {
        let s = LambdaSchedule::LinearDecay { start: 0.8, end: 0.1 };
        assert_eq!(s.lambda_at(0, 1).unwrap(), 0.8);
    }

    #[test]
    fn epoch_out_of_range_is_a_config_error() {
        let s = LambdaSchedule::Constant { value: 1.0 };
        assert!(matches!(s.lambda_at(5, 5), Err(Error::Config(_))));
        assert!(matches!(s.lambda_at(0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn negative_values_are_rejected() {
        let s = LambdaSchedule::LinearDecay { start: 1.0, end: -0.2 };
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn schedules_stay_nonnegative_over_the_whole_run() {
        let schedules = [
            LambdaSchedule::Constant { value: 0.7 },
            LambdaSchedule::LinearDecay { start: 1.0, end: 0.0 },
            LambdaSchedule::LinearDecay { start: 0.0, end: 1.0 },
            LambdaSchedule::DannRamp { scale: 2.5 },
        ];
        for s in schedules {
            for e in 0..257 {
                let v = s.lambda_at(e, 257).unwrap();
                assert!(v.is_finite() && v >= 0.0, "{s:?} at {e} gave {v}");
            }
        }
    }
}
