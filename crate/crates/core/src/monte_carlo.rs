//! Monte Carlo estimators for every closed-form metric.
//!
//! Seed policy: draws are split into chunks of [`CHUNK_SIZE`]; chunk `k` uses a ChaCha8
//! generator seeded with `seed` on stream `k`. Streams never overlap, each chunk is
//! reduced on its own, and the chunk summaries are merged in index order, so an estimate
//! depends only on `(seed, n)` and never on the number of worker threads.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::egg_channel::{HopConfig, SnrSampler};
use crate::error::{Error, Result};
use crate::metrics::{capacity_tau, conditional_ber, ModulationScheme};
use crate::relay_chain::{combine_snr, RelayConfig};

pub const CHUNK_SIZE: u64 = 1 << 16;
pub const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Seconds.
    pub wall_time: f64,
}

impl SimulationReport {
    /// `|value − estimate|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.estimate).abs() / self.std_error
    }
}

/// Where end-to-end SNR draws come from.
#[derive(Debug, Clone)]
pub enum SnrSource {
    Relay {
        hop1: SnrSampler,
        hop2: SnrSampler,
        c: f64,
    },
    /// Deterministic SNR, for degenerate-channel checks.
    Constant(f64),
}

impl SnrSource {
    pub fn relay(rc: &RelayConfig) -> Result<Self> {
        rc.validate()?;
        Ok(Self::Relay { hop1: SnrSampler::new(&rc.hop1)?, hop2: SnrSampler::new(&rc.hop2)?, c: rc.c })
    }

    pub fn constant(gamma: f64) -> Self {
        Self::Constant(gamma)
    }
}

impl Distribution<f64> for SnrSource {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Relay { hop1, hop2, c } => {
                let g1 = hop1.sample(rng);
                combine_snr(g1, hop2.sample(rng), *c)
            }
            Self::Constant(g) => *g,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Self { count, mean: self.mean + d * w, m2: self.m2 + other.m2 + d * d * self.count as f64 * w }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// The generator used for chunk `index` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sample mean of `f(γ)` over `n` end-to-end SNR draws.
pub fn simulate_mean<F>(source: &SnrSource, n: u64, seed: u64, f: F) -> Result<SimulationReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    if n < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let start = Instant::now();
    let chunks = n.div_ceil(CHUNK_SIZE);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            let mut acc = Moments::default();
            for _ in 0..len {
                acc.push(f(source.sample(&mut rng)));
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(Moments::default(), Moments::merge);
    Ok(SimulationReport {
        estimate: total.mean,
        std_error: total.std_error(),
        n_samples: n,
        seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn simulate_outage_from(source: &SnrSource, gamma_th: f64, n: u64, seed: u64) -> Result<SimulationReport> {
    let mut report = simulate_mean(source, n, seed, |g| if g <= gamma_th { 1.0 } else { 0.0 })?;
    let p = report.estimate;
    report.std_error = (p * (1.0 - p) / n as f64).sqrt();
    Ok(report)
}

/// Fraction of draws with `γ ≤ γ_th`, with the binomial standard error.
pub fn simulate_outage(rc: &RelayConfig, gamma_th: f64, n: u64, seed: u64) -> Result<SimulationReport> {
    simulate_outage_from(&SnrSource::relay(rc)?, gamma_th, n, seed)
}

pub fn simulate_ber_from(source: &SnrSource, m: &ModulationScheme, n: u64, seed: u64) -> Result<SimulationReport> {
    m.validate()?;
    simulate_mean(source, n, seed, |g| conditional_ber(m, g))
}

/// Conditional-MC average BER: the mean of the conditional error probability over SNR draws.
pub fn simulate_ber(rc: &RelayConfig, m: &ModulationScheme, n: u64, seed: u64) -> Result<SimulationReport> {
    simulate_ber_from(&SnrSource::relay(rc)?, m, n, seed)
}

pub fn simulate_capacity_from(source: &SnrSource, tau: f64, n: u64, seed: u64) -> Result<SimulationReport> {
    simulate_mean(source, n, seed, |g| (tau * g).ln_1p())
}

/// Mean of `ln(1 + τγ)` in nats, with `τ` from the destination hop.
pub fn simulate_capacity(rc: &RelayConfig, n: u64, seed: u64) -> Result<SimulationReport> {
    simulate_capacity_from(&SnrSource::relay(rc)?, capacity_tau(rc), n, seed)
}

pub fn simulate_moment_from(source: &SnrSource, k: u32, n: u64, seed: u64) -> Result<SimulationReport> {
    let k = i32::try_from(k).map_err(|_| Error::InvalidParameter(format!("moment order {k} too large")))?;
    simulate_mean(source, n, seed, |g| g.powi(k))
}

pub fn simulate_moment(rc: &RelayConfig, k: u32, n: u64, seed: u64) -> Result<SimulationReport> {
    simulate_moment_from(&SnrSource::relay(rc)?, k, n, seed)
}

/// `n` SNR draws of a single hop, generated chunk-wise like the estimators.
pub fn sample_hop_snr(h: &HopConfig, n: u64, seed: u64) -> Result<Vec<f64>> {
    let sampler = SnrSampler::new(h)?;
    let chunks = n.div_ceil(CHUNK_SIZE);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE) as usize;
            (0..len).map(|_| sampler.sample(&mut rng)).collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Goodness of fit of sorted draws against a closed-form CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Kolmogorov-Smirnov distance over the probed order statistics.
    pub ks_distance: f64,
    /// Largest probability gap between adjacent probes; the full-sample distance
    /// exceeds `ks_distance` by at most this much.
    pub probe_gap: f64,
    /// Largest `|F̂ − F|` in binomial standard errors at the pointwise probabilities.
    pub max_z: f64,
    pub probes: usize,
}

/// Compares the empirical CDF of `sorted` with `cdf` at `probes` evenly spaced order
/// statistics (for the distance) and at the `pointwise` probabilities (for `max_z`).
pub fn empirical_fit<F>(sorted: &[f64], probes: usize, pointwise: &[f64], cdf: F) -> Result<FitReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = sorted.len();
    if n == 0 || probes == 0 {
        return Err(Error::InvalidParameter("empirical_fit needs samples and probes".into()));
    }
    let mut ranks: Vec<usize> = (1..=probes).map(|k| (k * n).div_ceil(probes)).collect();
    let pointwise_start = ranks.len();
    ranks.extend(pointwise.iter().map(|&p| ((p * n as f64).ceil() as usize).clamp(1, n)));
    let xs: Vec<f64> = ranks.iter().map(|&i| sorted[i - 1]).collect();
    let fs = cdf(&xs)?;
    let nf = n as f64;
    let mut ks: f64 = 0.0;
    let mut gap: f64 = fs[0];
    for (k, (&i, &f)) in ranks[..pointwise_start].iter().zip(&fs).enumerate() {
        ks = ks.max((i as f64 / nf - f).abs()).max(((i - 1) as f64 / nf - f).abs());
        if k > 0 {
            gap = gap.max(f - fs[k - 1]);
        }
    }
    let max_z = ranks[pointwise_start..]
        .iter()
        .zip(&xs[pointwise_start..])
        .zip(&fs[pointwise_start..])
        .map(|((_, &x), &f)| {
            let emp = sorted.partition_point(|&v| v <= x) as f64 / nf;
            (emp - f).abs() / (f * (1.0 - f) / nf).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(FitReport { ks_distance: ks, probe_gap: gap, max_z, probes })
}
