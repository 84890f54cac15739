//! Zero-mean symmetric source distributions and reproducible sampling.
//!
//! Sampling uses ChaCha8 as a counter-based generator. A draw of `n` values
//! is cut into fixed-size chunks; chunk `k` reads stream `k` of a generator
//! keyed by the master seed. The output depends only on `(dist, n, seed)`,
//! never on how many worker threads produce the chunks.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Number of draws per independent generator stream.
pub const CHUNK_LEN: usize = 1 << 16;

/// Source random variable `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceDistribution {
    /// Uniform on `[-a, a]`.
    Uniform { a: f64 },
    /// Normal with mean 0 and standard deviation `sigma`.
    Normal { sigma: f64 },
    /// Laplace with mean 0 and scale `b`.
    Laplace { b: f64 },
}

impl SourceDistribution {
    pub fn uniform(a: f64) -> Result<Self> {
        check_scale("a", a)?;
        Ok(Self::Uniform { a })
    }

    pub fn normal(sigma: f64) -> Result<Self> {
        check_scale("sigma", sigma)?;
        Ok(Self::Normal { sigma })
    }

    pub fn laplace(b: f64) -> Result<Self> {
        check_scale("b", b)?;
        Ok(Self::Laplace { b })
    }

    /// Same family with unit variance.
    pub fn unit_variance(self) -> Self {
        match self {
            Self::Uniform { .. } => Self::Uniform { a: 3f64.sqrt() },
            Self::Normal { .. } => Self::Normal { sigma: 1.0 },
            Self::Laplace { .. } => Self::Laplace {
                b: std::f64::consts::FRAC_1_SQRT_2,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform { .. } => "uniform",
            Self::Normal { .. } => "normal",
            Self::Laplace { .. } => "laplace",
        }
    }

    /// The single scale parameter (`a`, `sigma` or `b`).
    pub fn scale(&self) -> f64 {
        match *self {
            Self::Uniform { a } => a,
            Self::Normal { sigma } => sigma,
            Self::Laplace { b } => b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let name = match self {
            Self::Uniform { .. } => "a",
            Self::Normal { .. } => "sigma",
            Self::Laplace { .. } => "b",
        };
        check_scale(name, self.scale())
    }

    #[inline]
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { a } => a * (2.0 * rng.random::<f64>() - 1.0),
            Self::Normal { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            Self::Laplace { b } => {
                // Inverse CDF on u in (-1/2, 1/2).
                let open: f64 = Open01.sample(rng);
                let u = open - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }

    /// Fills `out` with chunk `index` of the stream for `seed`.
    pub(crate) fn fill_chunk(&self, seed: u64, index: usize, out: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        for v in out.iter_mut() {
            *v = self.draw(&mut rng);
        }
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Chunk boundaries `(index, len)` covering `n` draws.
pub(crate) fn chunks(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = n.div_ceil(CHUNK_LEN);
    (0..count)
        .into_par_iter()
        .map(move |k| (k, CHUNK_LEN.min(n - k * CHUNK_LEN)))
}

/// `n` i.i.d. draws from `dist`, reproducible for a fixed `(dist, n, seed)`.
pub fn sample(dist: &SourceDistribution, n: usize, seed: u64) -> Result<Tensor> {
    if n == 0 {
        return Err(Error::EmptyRequest("sample count must be at least 1"));
    }
    dist.validate()?;
    let mut data = vec![0.0; n];
    data.par_chunks_mut(CHUNK_LEN)
        .enumerate()
        .for_each(|(k, out)| dist.fill_chunk(seed, k, out));
    Ok(Tensor::from_parts_unchecked(vec![n], data))
}

/// Kurtosis of the distribution: 1.8, 3 and 6 for uniform, normal and Laplace.
pub fn theoretical_kurtosis(dist: &SourceDistribution) -> f64 {
    match dist {
        SourceDistribution::Uniform { .. } => 1.8,
        SourceDistribution::Normal { .. } => 3.0,
        SourceDistribution::Laplace { .. } => 6.0,
    }
}

pub fn variance(dist: &SourceDistribution) -> f64 {
    match *dist {
        SourceDistribution::Uniform { a } => a * a / 3.0,
        SourceDistribution::Normal { sigma } => sigma * sigma,
        SourceDistribution::Laplace { b } => 2.0 * b * b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        (m, v)
    }

    #[test]
    fn uniform_mean_near_zero() {
        let s = sample(&SourceDistribution::uniform(1.0).unwrap(), 1_000_000, 11).unwrap();
        let (m, _) = mean_var(s.data());
        assert!(m.abs() < 0.005, "mean {m}");
    }

    #[test]
    fn normal_variance_near_one() {
        let s = sample(&SourceDistribution::normal(1.0).unwrap(), 1_000_000, 12).unwrap();
        let (_, v) = mean_var(s.data());
        assert!((v - 1.0).abs() < 0.01, "variance {v}");
    }

    #[test]
    fn uniform_support() {
        let s = sample(&SourceDistribution::uniform(2.0).unwrap(), 1_000_000, 13).unwrap();
        assert!(s.data().iter().all(|x| (-2.0..=2.0).contains(x)));
    }

    #[test]
    fn mean_within_four_standard_errors() {
        let n = 200_000;
        for (i, d) in [
            SourceDistribution::uniform(1.5).unwrap(),
            SourceDistribution::normal(0.7).unwrap(),
            SourceDistribution::laplace(2.0).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            let s = sample(d, n, 100 + i as u64).unwrap();
            let (m, _) = mean_var(s.data());
            assert!(m.abs() <= 4.0 * (variance(d) / n as f64).sqrt(), "{d:?}: {m}");
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = SourceDistribution::laplace(1.0).unwrap();
        let a = sample(&d, 200_001, 5).unwrap();
        let b = sample(&d, 200_001, 5).unwrap();
        let c = sample(&d, 200_001, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_stable_across_lengths() {
        let d = SourceDistribution::normal(1.0).unwrap();
        let short = sample(&d, 1000, 9).unwrap();
        let long = sample(&d, 3 * CHUNK_LEN + 5, 9).unwrap();
        assert_eq!(short.data(), &long.data()[..1000]);
    }

    #[test]
    fn empty_request_rejected() {
        let d = SourceDistribution::normal(1.0).unwrap();
        assert!(matches!(sample(&d, 0, 1), Err(Error::EmptyRequest(_))));
    }

    #[test]
    fn invalid_scales_rejected() {
        assert!(SourceDistribution::uniform(0.0).is_err());
        assert!(SourceDistribution::normal(-1.0).is_err());
        assert!(SourceDistribution::laplace(f64::INFINITY).is_err());
    }

    #[test]
    fn theoretical_values() {
        assert_eq!(theoretical_kurtosis(&SourceDistribution::uniform(7.0).unwrap()), 1.8);
        assert_eq!(theoretical_kurtosis(&SourceDistribution::normal(0.1).unwrap()), 3.0);
        assert_eq!(theoretical_kurtosis(&SourceDistribution::laplace(2.0).unwrap()), 6.0);
        assert!((variance(&SourceDistribution::uniform(1.0).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(variance(&SourceDistribution::normal(2.0).unwrap()), 4.0);
        assert_eq!(variance(&SourceDistribution::laplace(1.0).unwrap()), 2.0);
    }

    #[test]
    fn unit_variance_variants() {
        for d in [
            SourceDistribution::uniform(3.0).unwrap(),
            SourceDistribution::normal(3.0).unwrap(),
            SourceDistribution::laplace(3.0).unwrap(),
        ] {
            assert!((variance(&d.unit_variance()) - 1.0).abs() < 1e-12);
        }
    }
}
