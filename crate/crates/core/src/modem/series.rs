use std::f64::consts::PI;

use super::{check_snr, ErrorRateResult, Method};
use crate::channel::{NlosChannel, SeriesBranch};
use crate::error::Result;
use crate::specfun::{g_quarter, ln_gamma};

/// Angular part of the error-rate integral applied to `i^{s−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    /// `(1/π)∫₀^{π/2}∫ i^{s−1} exp(−γ̄i²/sin²θ) di dθ`
    HalfPi,
    /// The same over `θ ∈ (0, π/4]`.
    QuarterPi,
    /// `½∫ i^{s−1} exp(−γ̄i²) di`, with `γ̄` already divided by `j`.
    Differential,
}

impl Kernel {
    pub(crate) fn ln_weight(self, s: f64, ln_snr: f64) -> Result<f64> {
        let base = ln_gamma(0.5 * s)? - 0.5 * s * ln_snr;
        Ok(match self {
            // ½B(½, (s+1)/2)/(2π)
            Kernel::HalfPi => {
                base + 0.5 * PI.ln() + ln_gamma(0.5 * (s + 1.0))? - ln_gamma(0.5 * s + 1.0)? - (4.0 * PI).ln()
            }
            Kernel::QuarterPi => base + g_quarter(s)?.ln() - (2.0 * PI).ln(),
            Kernel::Differential => base - 4f64.ln(),
        })
    }
}

/// Walks the four branches term by term: `ln|coef·H^k/((c₁)_k(c₂)_k(c₃)_k k!)|`.
struct Terms {
    branches: [SeriesBranch; 4],
    ln_mag: [f64; 4],
    sign: [f64; 4],
    ln_h: f64,
    k: usize,
}

impl Terms {
    fn new(ch: &NlosChannel) -> Self {
        let branches = ch.series_branches();
        Terms {
            ln_mag: branches.map(|b| b.ln_coef),
            sign: branches.map(|b| b.sign),
            branches,
            ln_h: ch.h_omega().ln(),
            k: 0,
        }
    }

    fn advance(&mut self) {
        let kf = self.k as f64;
        for (i, b) in self.branches.iter().enumerate() {
            let mut step = self.ln_h - (kf + 1.0).ln();
            for c in b.poch {
                let v = c + kf;
                step -= v.abs().ln();
                if v < 0.0 {
                    self.sign[i] = -self.sign[i];
                }
            }
            self.ln_mag[i] += step;
        }
        self.k += 1;
    }

    /// Signed branch terms at the current `k` after applying the kernel.
    fn current(&self, kernel: Kernel, ln_snr: f64) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (i, b) in self.branches.iter().enumerate() {
            let s = b.exponent + self.k as f64;
            out[i] = self.sign[i] * (self.ln_mag[i] + kernel.ln_weight(s, ln_snr)?).exp();
        }
        Ok(out)
    }
}

/// Sum of the terms `k = 0..=terms`, accumulated k-major so that a longer
/// truncation extends a shorter one without reordering.
pub(crate) fn series_sum(ch: &NlosChannel, snr: f64, kernel: Kernel, terms: usize) -> Result<f64> {
    let ln_snr = snr.ln();
    let mut it = Terms::new(ch);
    let mut sum = 0.0;
    loop {
        for t in it.current(kernel, ln_snr)? {
            sum += t;
        }
        if it.k == terms {
            return Ok(sum);
        }
        it.advance();
    }
}

/// `e^c · max_{k>J} M_k` with `c = hΩ_r/√γ̄` and `M_k = (k!/c^k)·Σ|term_k|`,
/// which bounds `Σ_{k>J} Σ|term_k| = Σ_{k>J} (c^k/k!)·M_k`. The maximum is
/// located by scanning until `M_k` stays below `1e-3` of the running maximum
/// for 20 consecutive indices.
pub(crate) fn tail_bound(ch: &NlosChannel, snr: f64, kernel: Kernel, terms: usize) -> Result<f64> {
    let ln_snr = snr.ln();
    let c = ch.h_omega() / snr.sqrt();
    let ln_c = c.ln();
    let mut it = Terms::new(ch);
    while it.k <= terms {
        it.advance();
    }
    let mut best = f64::NEG_INFINITY;
    let mut quiet = 0;
    let mut ln_fact = ln_gamma(it.k as f64 + 1.0)?;
    while quiet < 20 && it.k < terms + 100_000 {
        let mags = it.current(kernel, ln_snr)?;
        let total: f64 = mags.iter().map(|t| t.abs()).sum();
        let m = if total > 0.0 {
            total.ln() + ln_fact - it.k as f64 * ln_c
        } else {
            f64::NEG_INFINITY
        };
        if m > best {
            best = m;
            quiet = 0;
        } else if m < best + 1e-3f64.ln() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        it.advance();
        ln_fact += (it.k as f64).ln();
    }
    Ok((c + best).exp())
}

/// Truncation-error bounds of the QPSK series. They cover the discarded
/// terms only; rounding in the partial sum (about `ε·max|term|`, visible at
/// low SNR where early terms are large) comes on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBounds {
    /// Upper bound on the magnitude of the `P(π/2)` tail.
    pub eps1: f64,
    /// Lower bound (non-positive) on the signed `P(π/4)` tail.
    pub eps2: f64,
}

impl TruncationBounds {
    /// Bound for `2P(π/2) − P(π/4)`: `2ε₁ − ε₂`.
    pub fn combined(&self) -> f64 {
        2.0 * self.eps1 - self.eps2
    }
}

/// The branch terms alternate in sign, so the bounds use branch magnitudes;
/// `ε₂` is then the negated magnitude bound of the `P(π/4)` tail.
pub fn truncation_bounds(ch: &NlosChannel, snr: f64, terms: usize) -> Result<TruncationBounds> {
    check_snr("truncation_bounds", snr)?;
    Ok(TruncationBounds {
        eps1: tail_bound(ch, snr, Kernel::HalfPi, terms)?,
        eps2: -tail_bound(ch, snr, Kernel::QuarterPi, terms)?,
    })
}

fn with_series(ch: &NlosChannel, p: f64, terms: usize, upper: f64, lower: f64) -> ErrorRateResult {
    let mut r = ErrorRateResult::plain(ch, p, Method::Series(terms));
    r.terms_used = Some(terms);
    r.truncation_upper = Some(upper);
    r.truncation_lower = Some(lower);
    r
}

/// BPSK bit error rate from the power series truncated after `k = J`.
pub fn ber_bpsk_series(ch: &NlosChannel, snr: f64, terms: usize) -> Result<ErrorRateResult> {
    check_snr("ber_bpsk_series", snr)?;
    let p = series_sum(ch, snr, Kernel::HalfPi, terms)?;
    let e1 = tail_bound(ch, snr, Kernel::HalfPi, terms)?;
    Ok(with_series(ch, p, terms, e1, -e1))
}

/// QPSK symbol error rate from the truncated series. `truncation_upper`
/// carries the combined bound `2ε₁ − ε₂`, `truncation_lower` carries `ε₂`.
pub fn ser_qpsk_series(ch: &NlosChannel, snr: f64, terms: usize) -> Result<ErrorRateResult> {
    check_snr("ser_qpsk_series", snr)?;
    let p2 = series_sum(ch, snr, Kernel::HalfPi, terms)?;
    let p4 = series_sum(ch, snr, Kernel::QuarterPi, terms)?;
    let b = truncation_bounds(ch, snr, terms)?;
    Ok(with_series(ch, 2.0 * p2 - p4, terms, b.combined(), b.eps2))
}

/// DPSK/NCFSK bit error rate from the truncated series; depends on `γ̄/j` only.
pub fn ber_dpsk_ncfsk_series(ch: &NlosChannel, snr: f64, j: f64, terms: usize) -> Result<ErrorRateResult> {
    check_snr("ber_dpsk_ncfsk_series", snr)?;
    let eff = snr / j;
    let p = series_sum(ch, eff, Kernel::Differential, terms)?;
    let e = tail_bound(ch, eff, Kernel::Differential, terms)?;
    Ok(with_series(ch, p, terms, e, -e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_channel;
    use crate::specfun::beta_fn;
    use approx::assert_relative_eq;

    fn moderate() -> NlosChannel {
        build_channel(1.0, 1.0, (6.99, 1.05), (4.59, 1.23)).unwrap()
    }

    #[test]
    fn frozen_bpsk_references() {
        let c = moderate();
        let p = ber_bpsk_series(&c, 10f64.powf(0.5), 60).unwrap().probability;
        assert_relative_eq!(p, 0.206_582_798_317_113_02, max_relative = 1e-10);
        let p = ber_bpsk_series(&c, 10f64.powf(3.5), 60).unwrap().probability;
        assert_relative_eq!(p, 0.019_503_025_555_010_033, max_relative = 1e-10);
    }

    #[test]
    fn zero_terms_is_the_hand_evaluated_leading_sum() {
        // Leading terms written with the Ξ/Λ coefficients at Ω_v = E₂ = 1.
        let c = moderate();
        let [a1, b1, a2, b2] = c.shapes();
        let snr: f64 = 200.0;
        let lead = |coef: f64, e: f64| {
            coef * crate::specfun::gamma(e / 2.0).unwrap() * beta_fn(0.5, (e + 1.0) / 2.0).unwrap() * snr.powf(-e / 2.0)
                / (4.0 * PI)
        };
        let want = lead(c.xi(a2 - b2), a2) + lead(c.xi(b2 - a2), b2) + lead(c.lambda(a1 - b1), a1)
            + lead(c.lambda(b1 - a1), b1);
        let got = ber_bpsk_series(&c, snr, 0).unwrap().probability;
        assert_relative_eq!(got, want, max_relative = 1e-11);
    }

    #[test]
    fn ncfsk_is_dpsk_at_half_snr() {
        let c = moderate();
        for snr in [3.0, 300.0] {
            let n = ber_dpsk_ncfsk_series(&c, snr, 2.0, 30).unwrap();
            let d = ber_dpsk_ncfsk_series(&c, snr / 2.0, 1.0, 30).unwrap();
            assert_eq!(n.probability, d.probability);
            assert_eq!(n.truncation_upper, d.truncation_upper);
        }
    }

    #[test]
    fn bounds_cover_the_tail_and_shrink() {
        let c = moderate();
        let snr = 100.0;
        let deep = ser_qpsk_series(&c, snr, 200).unwrap().probability;
        for j in [5, 10, 30] {
            let r = ser_qpsk_series(&c, snr, j).unwrap();
            assert!((r.probability - deep).abs() <= r.truncation_upper.unwrap());
        }
        let b10 = truncation_bounds(&c, snr, 10).unwrap();
        let b100 = truncation_bounds(&c, snr, 100).unwrap();
        assert!(b100.combined() < b10.combined());
        assert!(b10.eps2 <= 0.0 && b10.eps1 >= 0.0);
    }
}
