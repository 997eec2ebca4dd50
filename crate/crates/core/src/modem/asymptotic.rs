//! High-SNR asymptotes and SNR penalty factors.
//!
//! With `α > β` on both links the `β₁` and `β₂` branches of the series decay
//! slowest, so their `k = 0` terms dominate at high SNR.

use super::series::Kernel;
use super::{check_snr, db_to_linear, ErrorRateResult, Method, Modulation};
use crate::channel::NlosChannel;
use crate::error::{Error, Result};
use crate::specfun::beta_fn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptote {
    /// Two-term asymptote (`β₁` and `β₂` branches).
    pub result: ErrorRateResult,
    /// Single-term variant keeping only the branch with `β = min(β₁, β₂)`.
    pub single_term: f64,
}

fn leading_term(ch: &NlosChannel, branch: usize, kernel: Kernel, snr: f64) -> Result<f64> {
    let b = ch.series_branches()[branch];
    Ok(b.sign * (b.ln_coef + kernel.ln_weight(b.exponent, snr.ln())?).exp())
}

/// Dominant-term value of one `β` branch (index 1 is `β₂`, index 3 is `β₁`).
fn branch_asymptote(ch: &NlosChannel, branch: usize, modulation: Modulation, snr: f64) -> Result<f64> {
    match modulation {
        Modulation::Bpsk => leading_term(ch, branch, Kernel::HalfPi, snr),
        Modulation::Qpsk => Ok(2.0 * leading_term(ch, branch, Kernel::HalfPi, snr)?
            - leading_term(ch, branch, Kernel::QuarterPi, snr)?),
        m => leading_term(ch, branch, Kernel::Differential, snr / m.j().unwrap()),
    }
}

/// Two-term high-SNR asymptote. Values outside `[0, 1]` (which occur at low
/// SNR) are returned as computed with `out_of_range` set.
pub fn asymptotic_error(ch: &NlosChannel, snr: f64, modulation: Modulation) -> Result<Asymptote> {
    check_snr("asymptotic_error", snr)?;
    let t2 = branch_asymptote(ch, 1, modulation, snr)?;
    let t1 = branch_asymptote(ch, 3, modulation, snr)?;
    let [_, b1, _, b2] = ch.shapes();
    let single = if b1 <= b2 { t1 } else { t2 };
    Ok(Asymptote {
        result: ErrorRateResult::plain(ch, t1 + t2, Method::Asymptotic),
        single_term: single,
    })
}

/// SNR penalty of `scheme_b` relative to `scheme_a` at a target error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty {
    pub snr_a_db: f64,
    pub snr_b_db: f64,
    /// `snr_b_db − snr_a_db` from bisection on the two-term asymptotes.
    pub bisection_db: f64,
    /// Single-`β` closed form where one exists for the pair.
    pub closed_form_db: Option<f64>,
}

/// `(20/β)·log₁₀(π j^{β/2} / B(½, (β+1)/2))`, the single-`β` BPSK penalty
/// against DPSK (`j = 1`) or NCFSK (`j = 2`).
pub fn single_beta_penalty_db(beta: f64, j: f64) -> Result<f64> {
    let b = beta_fn(0.5, 0.5 * (beta + 1.0))?;
    Ok(20.0 / beta * (std::f64::consts::PI * j.powf(0.5 * beta) / b).log10())
}

/// DPSK to NCFSK penalty, `10·log₁₀2`.
pub fn differential_penalty_db() -> f64 {
    10.0 * 2f64.log10()
}

const TOP_DB: f64 = 200.0;

/// SNR (dB) at which the two-term asymptote falls to `target`, on its
/// decreasing high-SNR side.
pub fn asymptote_snr_db(ch: &NlosChannel, modulation: Modulation, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::domain("snr_penalty", format!("target must lie in (0, 0.5), got {target}")));
    }
    let f = |db: f64| asymptotic_error(ch, db_to_linear(db), modulation).map(|a| a.result.probability);
    if f(TOP_DB)? > target {
        return Err(Error::Range(format!("{modulation} asymptote stays above {target:e} up to {TOP_DB} dB")));
    }
    // Walk down until the asymptote climbs past the target.
    let mut lo = TOP_DB;
    loop {
        lo -= 1.0;
        if lo < 0.0 {
            return Err(Error::Range(format!("{modulation} asymptote never reaches {target:e} in [0, {TOP_DB}] dB")));
        }
        if f(lo)? >= target {
            break;
        }
    }
    let mut hi = lo + 1.0;
    loop {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-4 && (v - target).abs() < 1e-3 * target {
            return Ok(mid);
        }
        if hi - lo < 1e-12 {
            return Ok(mid);
        }
    }
}

pub fn snr_penalty(ch: &NlosChannel, scheme_a: Modulation, scheme_b: Modulation, target: f64) -> Result<Penalty> {
    let a = asymptote_snr_db(ch, scheme_a, target)?;
    let b = asymptote_snr_db(ch, scheme_b, target)?;
    let [_, b1, _, b2] = ch.shapes();
    let beta = b1.min(b2);
    use Modulation::*;
    let closed_form_db = match (scheme_a, scheme_b) {
        (Bpsk, Dpsk) => Some(single_beta_penalty_db(beta, 1.0)?),
        (Bpsk, Ncfsk) => Some(single_beta_penalty_db(beta, 2.0)?),
        (Dpsk, Ncfsk) => Some(differential_penalty_db()),
        _ => None,
    };
    Ok(Penalty {
        snr_a_db: a,
        snr_b_db: b,
        bisection_db: b - a,
        closed_form_db,
    })
}
