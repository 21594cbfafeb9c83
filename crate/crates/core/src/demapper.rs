//! Bitwise soft demapping with optional a-priori knowledge of co-located bits.
//!
//! A single kernel serves every case. Each point's log-likelihood
//! `-|y - x|^2 / (2 sigma^2)` is augmented by the log-probabilities of its
//! label bits at the prior positions, and the target LLR is the difference
//! of the log-sum-exp over the two half-sets. With no priors this is the
//! plain BICM demapper; with one prior it is the forward (delayed to
//! undelayed) or backward (undelayed to delayed) update; with `m - 1`
//! priors it is the iterative-demapping update.
//!
//! LLRs are `ln P(b = 0) / P(b = 1)`: positive favors 0. Extrinsic LLRs of
//! `+inf`/`-inf` mark bits known to be 0/1.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{invalid, Result};
use crate::Bit;

/// Exact log-sum-exp or the max-log approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DemapMode {
    #[default]
    Exact,
    MaxLog,
}

impl std::str::FromStr for DemapMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DemapMode::Exact),
            "maxlog" => Ok(DemapMode::MaxLog),
            other => Err(invalid(format!("unknown demap mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for DemapMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DemapMode::Exact => "exact",
            DemapMode::MaxLog => "maxlog",
        })
    }
}

/// AWGN noise variance per real and imaginary dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(invalid(format!("noise variance must be positive and finite, got {sigma2}")));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Extrinsic LLRs of co-located label positions, used as priors for one
/// target position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorSet {
    entries: Vec<(usize, f64)>,
}

impl PriorSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from `(label_position, extrinsic_llr)` pairs.
    pub fn from_entries(entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut set = Self::new();
        for (pos, llr) in entries {
            set.insert(pos, llr)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, position: usize, llr: f64) -> Result<()> {
        if llr.is_nan() {
            return Err(invalid("prior LLR is NaN"));
        }
        if self.entries.iter().any(|&(p, _)| p == position) {
            return Err(invalid(format!("duplicate prior on label position {position}")));
        }
        self.entries.push((position, llr));
        Ok(())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Probability that a bit equals `b` given its extrinsic LLR.
pub fn extrinsic_to_prob(l_e: f64, b: Bit) -> f64 {
    let p0 = if l_e == f64::INFINITY {
        1.0
    } else if l_e == f64::NEG_INFINITY {
        0.0
    } else {
        1.0 / (1.0 + (-l_e).exp())
    };
    if b == 0 {
        p0
    } else {
        1.0 - p0
    }
}

/// `ln(1 + e^x)` without overflow; `+inf` maps to `+inf`, `-inf` to 0.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `(ln P(b=0), ln P(b=1))` for an extrinsic LLR.
#[inline]
pub(crate) fn log_probs(l_e: f64) -> (f64, f64) {
    (-softplus(-l_e), -softplus(l_e))
}

/// Extrinsic LLRs feeding one prior position over a whole frame.
#[derive(Debug, Clone, Copy)]
pub enum PriorLlrs<'a> {
    /// One value per symbol.
    Values(&'a [f64]),
    /// The same value for every symbol, e.g. the `+inf` known-fill sentinel.
    Constant(f64),
}

impl PriorLlrs<'_> {
    #[inline]
    fn at(&self, j: usize) -> f64 {
        match self {
            PriorLlrs::Values(v) => v[j],
            PriorLlrs::Constant(c) => *c,
        }
    }
}

/// Sum of exponentials below which the shared-maximum shortcut falls back to
/// a per-half log-sum-exp.
const SHARED_SUM_FLOOR: f64 = 1e-250;

/// Per-symbol demapping kernel bound to a constellation and noise level.
#[derive(Debug, Clone)]
pub struct Demapper<'a> {
    constellation: &'a Constellation,
    mode: DemapMode,
    inv_two_sigma2: f64,
}

impl<'a> Demapper<'a> {
    pub fn new(constellation: &'a Constellation, noise: NoiseModel, mode: DemapMode) -> Self {
        Self {
            constellation,
            mode,
            inv_two_sigma2: 0.5 / noise.sigma2(),
        }
    }

    pub fn constellation(&self) -> &Constellation {
        self.constellation
    }

    /// Point evaluations performed by one pass over a frame of `n` symbols.
    pub fn evals_per_pass(&self, n: usize) -> u64 {
        (n * self.constellation.order()) as u64
    }

    /// Fills `metrics[label]` with the channel log-likelihood plus prior
    /// log-probabilities of `label`.
    #[inline]
    fn metrics(&self, y: Complex64, prior_logs: &[(usize, f64, f64)], metrics: &mut [f64]) {
        let c = self.constellation;
        for (label, (x, metric)) in c.points().iter().zip(metrics.iter_mut()).enumerate() {
            let mut v = -(y - x).norm_sqr() * self.inv_two_sigma2;
            for &(pos, lp0, lp1) in prior_logs {
                v += if c.label_bit(label, pos) == 0 { lp0 } else { lp1 };
            }
            *metric = v;
        }
    }

    /// LLR of `target` from filled metrics and their max-normalized
    /// exponentials.
    #[inline]
    fn llr(&self, metrics: &[f64], weights: &[f64], target: usize) -> f64 {
        let c = self.constellation;
        match self.mode {
            DemapMode::MaxLog => {
                let (mut m0, mut m1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (label, &v) in metrics.iter().enumerate() {
                    if c.label_bit(label, target) == 0 {
                        m0 = m0.max(v);
                    } else {
                        m1 = m1.max(v);
                    }
                }
                half_difference(m0, m1)
            }
            DemapMode::Exact => {
                let (mut s0, mut s1) = (0.0, 0.0);
                for (label, &w) in weights.iter().enumerate() {
                    if c.label_bit(label, target) == 0 {
                        s0 += w;
                    } else {
                        s1 += w;
                    }
                }
                if s0 > SHARED_SUM_FLOOR && s1 > SHARED_SUM_FLOOR {
                    return (s0 / s1).ln();
                }
                let lse0 = half_lse(c, metrics, target, 0);
                let lse1 = half_lse(c, metrics, target, 1);
                half_difference(lse0, lse1)
            }
        }
    }

    /// Computes LLRs for every position in `targets` over a frame, sharing
    /// one set of point evaluations per symbol. `out[k]` receives the LLRs of
    /// `targets[k]`.
    ///
    /// Prior positions must be distinct and disjoint from `targets`.
    pub fn demap_frame(
        &self,
        y: &[Complex64],
        targets: &[usize],
        priors: &[(usize, PriorLlrs<'_>)],
        out: &mut [&mut [f64]],
    ) {
        debug_assert_eq!(targets.len(), out.len());
        debug_assert!(priors.iter().all(|(p, _)| !targets.contains(p)));
        let order = self.constellation.order();
        let mut metrics = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let mut prior_logs = Vec::with_capacity(priors.len());
        for (j, &yj) in y.iter().enumerate() {
            prior_logs.clear();
            for (pos, llrs) in priors {
                let l = llrs.at(j);
                // A zero LLR shifts every metric equally; skipping it keeps
                // the result bit-identical to prior-free demapping.
                if l != 0.0 {
                    let (lp0, lp1) = log_probs(l);
                    prior_logs.push((*pos, lp0, lp1));
                }
            }
            self.metrics(yj, &prior_logs, &mut metrics);
            self.fill_weights(&metrics, &mut weights);
            for (k, &target) in targets.iter().enumerate() {
                out[k][j] = self.llr(&metrics, &weights, target);
            }
        }
    }

    #[inline]
    fn fill_weights(&self, metrics: &[f64], weights: &mut [f64]) {
        if self.mode == DemapMode::MaxLog {
            return;
        }
        let max = metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (w, &v) in weights.iter_mut().zip(metrics) {
            *w = if max == f64::NEG_INFINITY { 0.0 } else { (v - max).exp() };
        }
    }

    /// LLR of one symbol's `target` bit under `priors`.
    pub fn demap_symbol(&self, y: Complex64, target: usize, priors: &PriorSet) -> Result<f64> {
        let m = self.constellation.bits_per_symbol();
        if target >= m {
            return Err(invalid(format!("target position {target} out of range for m = {m}")));
        }
        let mut prior_logs = Vec::with_capacity(priors.entries().len());
        for &(pos, l) in priors.entries() {
            if pos >= m {
                return Err(invalid(format!("prior position {pos} out of range for m = {m}")));
            }
            if pos == target {
                return Err(invalid(format!("prior set contains the target position {target}")));
            }
            if l != 0.0 {
                let (lp0, lp1) = log_probs(l);
                prior_logs.push((pos, lp0, lp1));
            }
        }
        let order = self.constellation.order();
        let mut metrics = vec![0.0; order];
        let mut weights = vec![0.0; order];
        self.metrics(y, &prior_logs, &mut metrics);
        self.fill_weights(&metrics, &mut weights);
        Ok(self.llr(&metrics, &weights, target))
    }
}

fn half_lse(c: &Constellation, metrics: &[f64], target: usize, bit: Bit) -> f64 {
    let max = metrics
        .iter()
        .enumerate()
        .filter(|&(label, _)| c.label_bit(label, target) == bit)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = metrics
        .iter()
        .enumerate()
        .filter(|&(label, _)| c.label_bit(label, target) == bit)
        .map(|(_, &v)| (v - max).exp())
        .sum();
    max + sum.ln()
}

#[inline]
fn half_difference(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        0.0
    } else {
        a - b
    }
}

/// Prior-free LLR of `target` for one received symbol.
pub fn demap_no_prior(
    y: Complex64,
    c: &Constellation,
    nm: NoiseModel,
    target: usize,
    mode: DemapMode,
) -> Result<f64> {
    Demapper::new(c, nm, mode).demap_symbol(y, target, &PriorSet::new())
}

/// LLR of `target` for one received symbol given priors on other positions.
pub fn demap_with_priors(
    y: Complex64,
    c: &Constellation,
    nm: NoiseModel,
    target: usize,
    priors: &PriorSet,
    mode: DemapMode,
) -> Result<f64> {
    Demapper::new(c, nm, mode).demap_symbol(y, target, priors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ApskRate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct evaluation of the weighted likelihood ratio: plain sums of
    /// Gaussian kernels times products of prior probabilities.
    fn oracle(y: Complex64, c: &Constellation, sigma2: f64, target: usize, priors: &[(usize, f64)]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (label, x) in c.points().iter().enumerate() {
            let mut w = (-(y - x).norm_sqr() / (2.0 * sigma2)).exp();
            for &(pos, l) in priors {
                w *= extrinsic_to_prob(l, c.label_bit(label, pos));
            }
            if c.label_bit(label, target) == 0 {
                num += w;
            } else {
                den += w;
            }
        }
        (num / den).ln()
    }

    fn nm(s: f64) -> NoiseModel {
        NoiseModel::new(s).unwrap()
    }

    #[test]
    fn prob_conversion() {
        assert_eq!(extrinsic_to_prob(0.0, 0), 0.5);
        assert_eq!(extrinsic_to_prob(0.0, 1), 0.5);
        assert_eq!(extrinsic_to_prob(f64::INFINITY, 0), 1.0);
        assert_eq!(extrinsic_to_prob(f64::INFINITY, 1), 0.0);
        assert_eq!(extrinsic_to_prob(f64::NEG_INFINITY, 0), 0.0);
        assert_eq!(extrinsic_to_prob(f64::NEG_INFINITY, 1), 1.0);
        assert!((extrinsic_to_prob(3f64.ln(), 0) - 0.75).abs() < 1e-15);
        assert!((extrinsic_to_prob(3f64.ln(), 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn log_probs_match_probabilities() {
        for l in [-50.0, -3.0, -0.1, 0.0, 0.7, 12.0, 700.0] {
            let (a, b) = log_probs(l);
            assert!((a.exp() - extrinsic_to_prob(l, 0)).abs() < 1e-14);
            assert!((b.exp() - extrinsic_to_prob(l, 1)).abs() < 1e-14);
        }
        assert_eq!(log_probs(f64::INFINITY), (0.0, f64::NEG_INFINITY));
        assert_eq!(log_probs(f64::NEG_INFINITY), (f64::NEG_INFINITY, 0.0));
    }

    #[test]
    fn antipodal_closed_form() {
        let c = Constellation::binary_antipodal();
        let l = demap_no_prior(Complex64::new(1.0, 0.0), &c, nm(0.5), 0, DemapMode::Exact).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        let l = demap_no_prior(Complex64::new(0.0, 0.3), &c, nm(0.5), 0, DemapMode::Exact).unwrap();
        assert_eq!(l, 0.0);
        let l = demap_no_prior(Complex64::new(1.0, 0.0), &c, nm(0.5), 0, DemapMode::MaxLog).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
    }

    #[test]
    fn qam16_matches_bruteforce() {
        let c = Constellation::gray_qam(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let y = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let sigma2 = rng.gen_range(0.05..1.0);
            let target = rng.gen_range(0..4);
            let got = demap_no_prior(y, &c, nm(sigma2), target, DemapMode::Exact).unwrap();
            assert!((got - oracle(y, &c, sigma2, target, &[])).abs() < 1e-10);
        }
    }

    #[test]
    fn single_prior_matches_bruteforce() {
        let c = Constellation::gray_qam(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let y = Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let sigma2 = rng.gen_range(0.05..1.0);
            let target = rng.gen_range(0..4);
            let pos = (target + rng.gen_range(1..4)) % 4;
            let l = rng.gen_range(-8.0..8.0);
            let priors = PriorSet::from_entries(vec![(pos, l)]).unwrap();
            let got = demap_with_priors(y, &c, nm(sigma2), target, &priors, DemapMode::Exact).unwrap();
            assert!((got - oracle(y, &c, sigma2, target, &[(pos, l)])).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_priors_are_bit_exact() {
        let c = Constellation::gray_qam(6).unwrap();
        let y = Complex64::new(0.31, -0.77);
        for mode in [DemapMode::Exact, DemapMode::MaxLog] {
            for t in 0..6 {
                let a = demap_no_prior(y, &c, nm(0.2), t, mode).unwrap();
                let b = demap_with_priors(y, &c, nm(0.2), t, &PriorSet::new(), mode).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn known_prior_restricts_to_half_set() {
        let c = Constellation::gray_qam(4).unwrap();
        let y = Complex64::new(0.2, -0.5);
        let sigma2 = 0.3;
        for (l, bit) in [(f64::INFINITY, 0u8), (f64::NEG_INFINITY, 1u8)] {
            let priors = PriorSet::from_entries(vec![(1, l)]).unwrap();
            let got = demap_with_priors(y, &c, nm(sigma2), 0, &priors, DemapMode::Exact).unwrap();
            // Brute force over the points consistent with the known bit.
            let (mut num, mut den) = (0.0, 0.0);
            for (label, x) in c.points().iter().enumerate() {
                if c.label_bit(label, 1) != bit {
                    continue;
                }
                let w = (-(y - x).norm_sqr() / (2.0 * sigma2)).exp();
                if c.label_bit(label, 0) == 0 {
                    num += w;
                } else {
                    den += w;
                }
            }
            assert!((got - (num / den).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_prior_on_target() {
        let c = Constellation::gray_qam(4).unwrap();
        let priors = PriorSet::from_entries(vec![(2, 1.0)]).unwrap();
        let r = demap_with_priors(Complex64::new(0.0, 0.0), &c, nm(0.1), 2, &priors, DemapMode::Exact);
        assert!(matches!(r, Err(crate::Error::InvalidParameter(_))));
        assert!(PriorSet::from_entries(vec![(1, 0.0), (1, 2.0)]).is_err());
        assert!(NoiseModel::new(0.0).is_err());
    }

    #[test]
    fn llr_grows_toward_zero_labeled_point() {
        let c = Constellation::gray_qam(4).unwrap();
        let label = (0..16).find(|&l| c.label_bit(l, 1) == 0).unwrap();
        let x = c.point(label);
        let mut prev = f64::NEG_INFINITY;
        for sigma2 in [0.5, 0.2, 0.1, 0.05, 0.02, 0.01] {
            let l = demap_no_prior(x, &c, nm(sigma2), 1, DemapMode::Exact).unwrap();
            assert!(l > prev && l > 0.0);
            prev = l;
        }
    }

    #[test]
    fn frame_demap_matches_symbol_demap() {
        let c = Constellation::apsk32_dvbs2(ApskRate::R2_3).unwrap();
        let d = Demapper::new(&c, nm(0.15), DemapMode::Exact);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<Complex64> = (0..40)
            .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        let prior_vals: Vec<f64> = (0..40).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut a = vec![0.0; 40];
        let mut b = vec![0.0; 40];
        d.demap_frame(
            &y,
            &[0, 3],
            &[(2, PriorLlrs::Values(&prior_vals)), (4, PriorLlrs::Constant(f64::INFINITY))],
            &mut [&mut a, &mut b],
        );
        for j in 0..40 {
            let priors = PriorSet::from_entries(vec![(2, prior_vals[j]), (4, f64::INFINITY)]).unwrap();
            assert_eq!(a[j], d.demap_symbol(y[j], 0, &priors).unwrap());
            assert_eq!(b[j], d.demap_symbol(y[j], 3, &priors).unwrap());
        }
    }

    #[test]
    fn far_from_constellation_stays_finite() {
        let c = Constellation::gray_qam(6).unwrap();
        let d = Demapper::new(&c, nm(1e-4), DemapMode::Exact);
        let l = d.demap_symbol(Complex64::new(40.0, -40.0), 0, &PriorSet::new()).unwrap();
        assert!(l.is_finite());
        let exact = l;
        let approx = Demapper::new(&c, nm(1e-4), DemapMode::MaxLog)
            .demap_symbol(Complex64::new(40.0, -40.0), 0, &PriorSet::new())
            .unwrap();
        assert!((exact - approx).abs() < 6.0 * 2f64.ln());
    }

    proptest::proptest! {
        #[test]
        fn zero_priors_reduce_to_prior_free(
            re in -1.5f64..1.5, im in -1.5f64..1.5, sigma2 in 0.05f64..2.0,
            target in 0usize..6, mask in 0u32..64,
        ) {
            let c = Constellation::gray_qam(6).unwrap();
            let y = Complex64::new(re, im);
            let entries = (0..6).filter(|&p| p != target && mask >> p & 1 == 1).map(|p| (p, 0.0)).collect();
            let priors = PriorSet::from_entries(entries).unwrap();
            let a = demap_with_priors(y, &c, nm(sigma2), target, &priors, DemapMode::Exact).unwrap();
            let b = demap_no_prior(y, &c, nm(sigma2), target, DemapMode::Exact).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn maxlog_stays_close_to_exact(
            re in -1.5f64..1.5, im in -1.5f64..1.5, sigma2 in 0.05f64..1.0, target in 0usize..4,
        ) {
            let c = Constellation::gray_qam(4).unwrap();
            let y = Complex64::new(re, im);
            let a = demap_no_prior(y, &c, nm(sigma2), target, DemapMode::Exact).unwrap();
            let b = demap_no_prior(y, &c, nm(sigma2), target, DemapMode::MaxLog).unwrap();
            proptest::prop_assert!((a - b).abs() <= 4.0 * 2f64.ln() + 1e-12);
        }
    }
}
