//! Monte-Carlo oracle that samples the cascaded fading directly.
//!
//! Samples are split over `streams` lanes. Lane `l` draws from a ChaCha8
//! generator seeded with `seed` on stream `l`, and lane results are reduced
//! in lane order, so estimates do not depend on scheduling or thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::channel::{GammaGammaParams, NlosChannel};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::modem::{ErrorRateResult, Method, Modulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub sample_count: usize,
    pub seed: u64,
    pub streams: usize,
    pub histogram_bins: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sample_count: 1_000_000,
            seed: 0,
            streams: 64,
            histogram_bins: 50,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.sample_count == 0 || self.streams == 0 {
            return Err(Error::InsufficientSamples(format!(
                "need at least one sample and one stream, got {} and {}",
                self.sample_count, self.streams
            )));
        }
        Ok(())
    }

    /// Samples assigned to lane `l`; the first `n mod streams` lanes take one extra.
    fn lane_len(&self, lane: usize) -> usize {
        self.sample_count / self.streams + usize::from(lane < self.sample_count % self.streams)
    }
}

pub fn stream_rng(seed: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

/// `X·Y` with `X ~ Gamma(α, mean 1)` and `Y ~ Gamma(β, mean Ω)`.
pub fn sample_gamma_gamma<R: Rng + ?Sized>(params: &GammaGammaParams, rng: &mut R) -> f64 {
    let x = Gamma::new(params.alpha, 1.0 / params.alpha).unwrap().sample(rng);
    let y = Gamma::new(params.beta, params.mean_power / params.beta).unwrap().sample(rng);
    x * y
}

/// Received power: `p_v` from link 1, then link 2 with mean `p_v·E₂`.
pub fn sample_nlos<R: Rng + ?Sized>(ch: &NlosChannel, rng: &mut R) -> f64 {
    let pv = sample_gamma_gamma(&ch.link1, rng);
    let a2 = ch.link2_alpha;
    let b2 = ch.link2_beta;
    let x = Gamma::new(a2, 1.0 / a2).unwrap().sample(rng);
    let y = Gamma::new(b2, pv * ch.e2 / b2).unwrap().sample(rng);
    x * y
}

/// `cfg.sample_count` normalized irradiance samples `p_r/Ω_r`, lane-ordered.
pub fn sample_normalized(ch: &NlosChannel, cfg: &SimConfig, exec: Execution) -> Result<Vec<f64>> {
    cfg.validate()?;
    let lanes = exec::map_range(exec, cfg.streams, |lane| {
        let mut rng = stream_rng(cfg.seed, lane as u64);
        (0..cfg.lane_len(lane))
            .map(|_| sample_nlos(ch, &mut rng) / ch.omega_r)
            .collect::<Vec<_>>()
    });
    Ok(lanes.concat())
}

/// Counts of `samples` in `bins` equal-width bins over `[lo, hi)`; samples
/// outside the range are dropped.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let w = (hi - lo) / bins as f64;
    for &s in samples {
        if s >= lo && s < hi {
            let k = (((s - lo) / w) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    counts
}

/// Mean of the conditional error probability at `γ = γ̄·i_n²` over sampled
/// irradiance, with its standard error.
pub fn empirical_error_rate(
    ch: &NlosChannel,
    snr: f64,
    modulation: Modulation,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<ErrorRateResult> {
    cfg.validate()?;
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::domain("empirical_error_rate", format!("mean SNR must be non-negative, got {snr}")));
    }
    let lanes = exec::map_range(exec, cfg.streams, |lane| {
        let mut rng = stream_rng(cfg.seed, lane as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..cfg.lane_len(lane) {
            let i = sample_nlos(ch, &mut rng) / ch.omega_r;
            let p = modulation.conditional(snr * i * i);
            s += p;
            s2 += p * p;
        }
        (s, s2)
    });
    let (mut s, mut s2) = (0.0, 0.0);
    for (a, b) in lanes {
        s += a;
        s2 += b;
    }
    let n = cfg.sample_count as f64;
    let mean = s / n;
    if mean * n < 100.0 {
        return Err(Error::InsufficientSamples(format!(
            "expected error count {:.1} is below 100; raise sample_count above {}",
            mean * n,
            cfg.sample_count
        )));
    }
    let var = ((s2 / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    let mut r = ErrorRateResult::plain(ch, mean, Method::MonteCarlo(cfg.sample_count));
    r.std_error = Some((var / n).sqrt());
    Ok(r)
}
