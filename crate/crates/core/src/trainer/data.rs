use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of spiral arms (classes).
pub const CLASSES: usize = 3;
pub const FEATURES: usize = 2;
/// Full turns each arm makes from the centre to the rim.
const TURNS: f64 = 1.0;
/// Angular noise (radians) added to each point.
const ANGLE_NOISE: f64 = 0.25;

/// Labeled 2-D points, features stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub dims: usize,
    pub classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dims..(i + 1) * self.dims]
    }

    /// Count of examples per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

fn spiral(n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let noise = Normal::new(0.0, ANGLE_NOISE).expect("valid std dev");
    // Round-robin labels, then shuffle so batches mix classes.
    let mut labels: Vec<usize> = (0..n).map(|i| i % CLASSES).collect();
    labels.shuffle(rng);
    let mut features = Vec::with_capacity(n * FEATURES);
    for &c in &labels {
        let r: f64 = rng.random_range(0.05..1.0);
        let theta = c as f64 * std::f64::consts::TAU / CLASSES as f64
            + r * TURNS * std::f64::consts::TAU
            + noise.sample(rng);
        features.push(r * theta.cos());
        features.push(r * theta.sin());
    }
    Dataset {
        features,
        labels,
        dims: FEATURES,
        classes: CLASSES,
    }
}

/// Split sizes that, together with a seed, reproduce a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub n_train: usize,
    pub n_test: usize,
}

impl DatasetSpec {
    pub fn generate(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        make_dataset(self.n_train, self.n_test, seed)
    }
}

/// Interleaved three-arm spirals: a train and a test split, deterministic
/// per seed. The classes are not linearly separable.
pub fn make_dataset(n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::EmptyRequest("dataset sizes must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xda7a);
    let train = spiral(n_train, &mut rng);
    let test = spiral(n_test, &mut rng);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_classes() {
        let (train, test) = make_dataset(1000, 200, 7).unwrap();
        for d in [&train, &test] {
            let equal = d.len() as f64 / CLASSES as f64;
            for c in d.class_counts() {
                assert!((c as f64 - equal).abs() <= 0.05 * equal);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(make_dataset(50, 10, 3).unwrap(), make_dataset(50, 10, 3).unwrap());
        assert_ne!(make_dataset(50, 10, 3).unwrap(), make_dataset(50, 10, 4).unwrap());
    }

    #[test]
    fn empty_split_rejected() {
        assert!(make_dataset(0, 10, 1).is_err());
        assert!(make_dataset(10, 0, 1).is_err());
    }
}
