use super::{check_snr, ErrorRateResult, Method, Modulation};
use crate::channel::NlosChannel;
use crate::error::Result;
use crate::quad::{integrate_with_points, Tolerance};

/// Average error rate by direct integration of the conditional error
/// probability against the quadrature density. This is the reference the
/// closed forms are checked against.
pub fn error_rate_quadrature(channel: &NlosChannel, snr: f64, modulation: Modulation) -> Result<ErrorRateResult> {
    check_snr("error_rate_quadrature", snr)?;
    if modulation == Modulation::Ncfsk {
        // Same integral as DPSK at γ̄/2; routing through it keeps the two bit-identical.
        return error_rate_quadrature(channel, snr / 2.0, Modulation::Dpsk);
    }
    let [_, b1, _, b2] = channel.shapes();
    let beta_min = b1.min(b2);
    // Work in u = ln i. Below the SNR knee the integrand behaves as i^{β_min};
    // above it the conditional rate decays like exp(−γ̄i²/j).
    let knee = (-0.5 * snr.ln()).min(0.0);
    let lo = knee - 40.0 / beta_min - 2.0;
    let hi = (0.5 * (750.0 / snr).ln()).clamp(1.0, 14.0);
    let mut failure = None;
    let integrand = |u: f64| {
        let i = u.exp();
        match channel.pdf_quadrature_normalized(i) {
            Ok(f) => f * i * modulation.conditional(snr * i * i),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let r = integrate_with_points(
        integrand,
        lo,
        hi,
        &[knee, 0.0],
        Tolerance::rel(1e-10).with_max_intervals(4000),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ErrorRateResult::plain(channel, r.value, Method::Quadrature))
}
