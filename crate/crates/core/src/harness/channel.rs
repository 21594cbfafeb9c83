//! AWGN channel, Eb/N0 calibration and per-trial random streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constellation::SymbolFrame;
use crate::demapper::NoiseModel;
use crate::error::{invalid, Result};

/// Per-dimension noise variance for unit-energy symbols carrying `eta`
/// information bits each: `1 / (2 eta 10^(Eb/N0 / 10))`.
pub fn ebn0_to_sigma2(ebn0_db: f64, eta: f64) -> Result<NoiseModel> {
    if eta <= 0.0 || !eta.is_finite() {
        return Err(invalid(format!("spectral efficiency must be positive, got {eta}")));
    }
    if !ebn0_db.is_finite() {
        return Err(invalid(format!("Eb/N0 must be finite, got {ebn0_db}")));
    }
    NoiseModel::new(1.0 / (2.0 * eta * 10f64.powf(ebn0_db / 10.0)))
}

/// Adds circularly symmetric Gaussian noise of per-dimension variance
/// `sigma^2`.
pub fn awgn<R: Rng + ?Sized>(x: &SymbolFrame, noise: &NoiseModel, rng: &mut R) -> SymbolFrame {
    let sigma = noise.sigma2().sqrt();
    let symbols = x
        .symbols
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re, im) * sigma
        })
        .collect();
    SymbolFrame { symbols }
}

/// Derives one independent ChaCha stream per (grid point, trial).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, point: usize, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(((point as u64) << 40) | trial);
        rng
    }
}
