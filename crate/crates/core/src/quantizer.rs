//! Symmetric uniform M-bit quantizer.
//!
//! Values inside `[-τ, τ]` with `τ = 2^(M-1)·Δ` are rounded to the nearest
//! multiple of `Δ` (ties away from zero); values outside saturate at `±τ`.
//! The grid `{-2^(M-1), …, 2^(M-1)}·Δ` has `2^M + 1` levels, one more than
//! an M-bit code can index. No integer codes are emitted here, so the extra
//! level is kept as is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAX_BITS: u32 = 32;

/// Bit-width and step size of a symmetric uniform quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    bits: u32,
    step: f64,
}

impl QuantizerConfig {
    pub fn new(bits: u32, step: f64) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::InvalidQuantizer(format!(
                "bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidQuantizer(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        let cfg = Self { bits, step };
        if !cfg.threshold().is_finite() {
            return Err(Error::InvalidQuantizer(format!(
                "threshold 2^{}·{step} overflows",
                bits - 1
            )));
        }
        Ok(cfg)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Clamp threshold `τ = 2^(M-1)·Δ`.
    pub fn threshold(&self) -> f64 {
        half_levels(self.bits) * self.step
    }

    /// Same bit-width, step multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.bits, self.step * factor)
    }

    /// Quantizes a value already known to be finite.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let tau = self.threshold();
        if x > tau {
            tau
        } else if x < -tau {
            -tau
        } else {
            // f64::round breaks ties away from zero.
            self.step * (x / self.step).round()
        }
    }
}

/// `2^(M-1)` as a float.
pub(crate) fn half_levels(bits: u32) -> f64 {
    2f64.powi(bits as i32 - 1)
}

/// Quantizes a single finite value.
pub fn quantize_scalar(x: f64, cfg: &QuantizerConfig) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { index: 0, value: x });
    }
    Ok(cfg.apply(x))
}

/// Elementwise quantization. Shape is preserved.
pub fn quantize_tensor(t: &Tensor, cfg: &QuantizerConfig) -> Result<Tensor> {
    let data = t
        .data()
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            if x.is_finite() {
                Ok(cfg.apply(x))
            } else {
                Err(Error::NonFinite { index, value: x })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Tensor::from_parts_unchecked(t.shape().to_vec(), data))
}

/// Max-abs calibration: picks `Δ = max|t| / 2^(bits-1)` so that the largest
/// element lands exactly on the clamp threshold.
pub fn step_from_range(t: &Tensor, bits: u32) -> Result<QuantizerConfig> {
    if t.is_empty() {
        return Err(Error::EmptyRequest("tensor has no elements"));
    }
    crate::tensor::check_finite(t.data())?;
    let max_abs = t.max_abs();
    if max_abs == 0.0 {
        return Err(Error::DegenerateRange);
    }
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidQuantizer(format!(
            "bits must be in 1..={MAX_BITS}, got {bits}"
        )));
    }
    QuantizerConfig::new(bits, max_abs / half_levels(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(bits: u32, step: f64) -> QuantizerConfig {
        QuantizerConfig::new(bits, step).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let c = cfg(4, 1.0);
        assert_eq!(quantize_scalar(3.4, &c).unwrap(), 3.0);
        assert_eq!(quantize_scalar(100.0, &c).unwrap(), 8.0);
        assert_eq!(quantize_scalar(-8.7, &c).unwrap(), -8.0);
        assert_eq!(quantize_scalar(2.5, &c).unwrap(), 3.0);
        assert_eq!(quantize_scalar(-2.5, &c).unwrap(), -3.0);
    }

    #[test]
    fn saturation_point_maps_to_threshold() {
        let c = cfg(3, 0.3);
        assert_eq!(c.apply(c.threshold()), c.threshold());
        assert_eq!(c.apply(-c.threshold()), -c.threshold());
    }

    #[test]
    fn non_finite_scalar_rejected() {
        let c = cfg(4, 1.0);
        assert!(matches!(
            quantize_scalar(f64::INFINITY, &c),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(QuantizerConfig::new(0, 1.0).is_err());
        assert!(QuantizerConfig::new(33, 1.0).is_err());
        assert!(QuantizerConfig::new(4, 0.0).is_err());
        assert!(QuantizerConfig::new(4, -1.0).is_err());
        assert!(QuantizerConfig::new(4, f64::NAN).is_err());
        assert!(QuantizerConfig::new(32, f64::MAX).is_err());
        assert!(QuantizerConfig::new(32, 1.0).is_ok());
    }

    #[test]
    fn tensor_examples() {
        let c = cfg(4, 1.0);
        let z = Tensor::from_vec(vec![0.0, 0.0]).unwrap();
        assert_eq!(quantize_tensor(&z, &c).unwrap().data(), &[0.0, 0.0]);
        let t = Tensor::from_vec(vec![3.4, 100.0]).unwrap();
        assert_eq!(quantize_tensor(&t, &c).unwrap().data(), &[3.0, 8.0]);
        let t = Tensor::from_vec(vec![-8.7]).unwrap();
        assert_eq!(quantize_tensor(&t, &c).unwrap().data(), &[-8.0]);
    }

    #[test]
    fn tensor_keeps_shape() {
        let t = Tensor::new(vec![2, 2], vec![0.1, 0.9, -0.4, 2.2]).unwrap();
        let q = quantize_tensor(&t, &cfg(2, 0.5)).unwrap();
        assert_eq!(q.shape(), &[2, 2]);
        assert_eq!(q.data(), &[0.0, 1.0, -0.5, 1.0]);
    }

    #[test]
    fn step_from_range_examples() {
        let t = Tensor::from_vec(vec![-1.0, 0.5, 1.0]).unwrap();
        assert_eq!(step_from_range(&t, 4).unwrap().step(), 0.125);
        let t = Tensor::from_vec(vec![2.0, -4.0]).unwrap();
        assert_eq!(step_from_range(&t, 2).unwrap().step(), 2.0);
        let t = Tensor::from_vec(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(step_from_range(&t, 4), Err(Error::DegenerateRange)));
    }

    #[test]
    fn max_abs_element_sits_on_threshold() {
        let t = Tensor::from_vec(vec![0.3, -0.77, 0.5]).unwrap();
        let c = step_from_range(&t, 5).unwrap();
        assert_eq!(c.apply(-0.77), -c.threshold());
    }

    fn config_strategy() -> impl Strategy<Value = QuantizerConfig> {
        (1u32..=16, 1e-3f64..10.0).prop_map(|(b, s)| cfg(b, s))
    }

    proptest! {
        #[test]
        fn idempotent(x in -1e4f64..1e4, c in config_strategy()) {
            let q = c.apply(x);
            prop_assert_eq!(c.apply(q), q);
        }

        #[test]
        fn magnitude_bounded(x in -1e6f64..1e6, c in config_strategy()) {
            prop_assert!(c.apply(x).abs() <= c.threshold());
        }

        #[test]
        fn in_range_error_at_most_half_step(u in -1.0f64..1.0, c in config_strategy()) {
            let x = u * c.threshold();
            prop_assert!((x - c.apply(x)).abs() <= c.step() / 2.0 * (1.0 + 1e-12));
        }

        #[test]
        fn odd_symmetry_off_ties(x in -1e3f64..1e3, c in config_strategy()) {
            let r = x / c.step();
            prop_assume!((r.abs().fract() - 0.5).abs() > 1e-9);
            prop_assert_eq!(c.apply(-x), -c.apply(x));
        }

        #[test]
        fn monotone(x in -1e3f64..1e3, d in 0.0f64..50.0, c in config_strategy()) {
            prop_assert!(c.apply(x) <= c.apply(x + d));
        }
    }
}
