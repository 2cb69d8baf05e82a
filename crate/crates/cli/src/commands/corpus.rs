//! Seeded random corpora shared by `verify` and `bmo`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conducta_core::microstructure::{generate_random, RandomMode};
use conducta_core::{PhaseSet, VoxelGrid};

use crate::{CliError, CorpusArgs};

/// Smallest drawn weight relative to the largest, so no phase is vanishingly
/// rare before normalization.
const MIN_WEIGHT: f64 = 0.2;

impl CorpusArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.count == 0 {
            return bad("--count must be at least 1".into());
        }
        if !(2..=3).contains(&self.dim) {
            return bad(format!("--dim must be 2 or 3, got {}", self.dim));
        }
        if self.size < 2 || !self.size.is_power_of_two() {
            return bad(format!("--size must be a power of two >= 2, got {}", self.size));
        }
        if !(1..=16).contains(&self.phases) {
            return bad(format!("--phases must be between 1 and 16, got {}", self.phases));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite()) {
            return bad(format!(
                "need 0 < sigma-min <= sigma-max, got {} and {}",
                self.sigma_min, self.sigma_max
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.size; self.dim]
    }

    pub fn member_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    /// Phase set and grid of corpus member `index`. Conductivities are
    /// log-uniform in `[sigma_min, sigma_max]`; fractions are uniform weights
    /// in `[MIN_WEIGHT, 1]`, normalized.
    pub fn member(&self, index: usize) -> Result<(u64, PhaseSet, VoxelGrid), CliError> {
        let seed = self.member_seed(index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // the grid generator consumes stream 0 of the same seed
        rng.set_stream(1);
        let (lo, hi) = (self.sigma_min.ln(), self.sigma_max.ln());
        let sigma: Vec<f64> = (0..self.phases)
            .map(|_| (lo + (hi - lo) * rng.gen::<f64>()).exp())
            .collect();
        let weights: Vec<f64> = (0..self.phases).map(|_| rng.gen_range(MIN_WEIGHT..=1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mu: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let ps = PhaseSet::from_pairs(self.dim, &sigma, &mu)?;
        let mode = match self.correlation_length {
            Some(correlation_length) => RandomMode::SmoothedNoise { correlation_length },
            None => RandomMode::Iid,
        };
        let g = generate_random(&ps, &self.shape(), seed, mode)?;
        Ok((seed, ps, g))
    }
}
