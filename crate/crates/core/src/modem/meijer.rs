use std::f64::consts::{LN_2, PI};

use super::{check_snr, ErrorRateResult, Method};
use crate::channel::NlosChannel;
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, gauss_legendre_on};
use crate::specfun::{ln_gamma, meijer_g_scaled, ContourConfig, MeijerGSpec};

/// `ln(H^μ / ΠΓ(shape))`, the common scale of all closed forms.
fn ln_density_scale(ch: &NlosChannel) -> f64 {
    let lg: f64 = ch.shapes().iter().map(|&x| ln_gamma(x).unwrap()).sum();
    ch.mu() * ch.h_omega().ln() - lg
}

/// Lower parameters shared by the PSK and DPSK kernels: each density
/// parameter `b` split into `b/2, b/2 + 1/2`.
fn doubled_b(ch: &NlosChannel) -> Vec<f64> {
    ch.meijer_b().iter().flat_map(|&b| [0.5 * b, 0.5 * b + 0.5]).collect()
}

fn ln_g(spec: &MeijerGSpec, func: &'static str) -> Result<f64> {
    let g = meijer_g_scaled(spec, &ContourConfig::default())?;
    if !(g.mantissa > 0.0) {
        return Err(Error::Accuracy {
            func,
            estimate: g.value(),
            achieved: g.rel_error,
        });
    }
    Ok(g.ln_abs())
}

/// `ln A` of the Craig-form kernel.
fn ln_a(ch: &NlosChannel, snr: f64) -> f64 {
    (ch.a - 4.0) * LN_2 + ln_density_scale(ch) - 3.0 * PI.ln() - 0.5 * ch.mu() * snr.ln()
}

/// `P(π/2) = (1/π)∫₀^{π/2} E[exp(−γ̄ I²/sin²θ)] dθ`, the BPSK bit error rate,
/// in closed form through `G^{8,2}_{2,9}`.
pub fn p_half_pi_meijer(ch: &NlosChannel, snr: f64) -> Result<f64> {
    check_snr("p_half_pi_meijer", snr)?;
    let mu = ch.mu();
    let mut b = doubled_b(ch);
    b.push(-0.5 * mu);
    let kappa = ch.h_omega().powi(2) / (256.0 * snr);
    let spec = MeijerGSpec::new(8, 2, vec![1.0 - 0.5 * mu, 0.5 - 0.5 * mu], b, kappa)?;
    let ln = ln_a(ch, snr) - LN_2 + 0.5 * PI.ln() + ln_g(&spec, "p_half_pi_meijer")?;
    Ok(ln.exp())
}

/// `A ∫₀^x sin^μθ · G^{8,1}_{1,8}(κ sin²θ) dθ`, integrated with Gauss-Legendre
/// (doubling from 64 nodes) after `θ = x·t²`, which smooths the `θ^β` start.
pub(crate) fn p_meijer_integral(ch: &NlosChannel, snr: f64, upper: f64) -> Result<f64> {
    let mu = ch.mu();
    let b = doubled_b(ch);
    let kappa = ch.h_omega().powi(2) / (256.0 * snr);
    let la = ln_a(ch, snr);
    let failure = std::cell::RefCell::new(None);
    let mut eval = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let th = upper * t * t;
        let s = th.sin();
        let spec = MeijerGSpec::new(8, 1, vec![1.0 - 0.5 * mu], b.clone(), kappa * s * s);
        match spec.and_then(|sp| ln_g(&sp, "p_quarter_pi_meijer")) {
            Ok(lg) => (la + mu * s.ln() + lg).exp() * 2.0 * upper * t,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut n = 64;
    let mut prev = gauss_legendre_on(&mut eval, 0.0, 1.0, &gauss_legendre(n));
    loop {
        n *= 2;
        let cur = gauss_legendre_on(&mut eval, 0.0, 1.0, &gauss_legendre(n));
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        if (cur - prev).abs() <= 1e-8 * cur.abs() {
            return Ok(cur);
        }
        if n >= 4096 {
            return Err(Error::Accuracy {
                func: "p_quarter_pi_meijer",
                estimate: cur,
                achieved: ((cur - prev) / cur).abs(),
            });
        }
        prev = cur;
    }
}

/// `P(π/4)` by numerical integration of the Meijer kernel.
pub fn p_quarter_pi_meijer(ch: &NlosChannel, snr: f64) -> Result<f64> {
    check_snr("p_quarter_pi_meijer", snr)?;
    p_meijer_integral(ch, snr, PI / 4.0)
}

pub fn ber_bpsk_meijer(ch: &NlosChannel, snr: f64) -> Result<ErrorRateResult> {
    Ok(ErrorRateResult::plain(ch, p_half_pi_meijer(ch, snr)?, Method::Meijer))
}

/// QPSK symbol error rate `2P(π/2) − P(π/4)`.
pub fn ser_qpsk_meijer(ch: &NlosChannel, snr: f64) -> Result<ErrorRateResult> {
    let p2 = p_half_pi_meijer(ch, snr)?;
    let p4 = p_quarter_pi_meijer(ch, snr)?;
    Ok(ErrorRateResult::plain(ch, 2.0 * p2 - p4, Method::Meijer))
}

/// DPSK (`j = 1`) or NCFSK (`j = 2`) bit error rate through `G^{8,1}_{1,8}`.
/// Depends on `γ̄/j` only.
pub fn ber_dpsk_ncfsk_meijer(ch: &NlosChannel, snr: f64, j: f64) -> Result<ErrorRateResult> {
    check_snr("ber_dpsk_ncfsk_meijer", snr)?;
    let eff = snr / j;
    let mu = ch.mu();
    let spec = MeijerGSpec::new(
        8,
        1,
        vec![1.0 - 0.5 * mu],
        doubled_b(ch),
        ch.h_omega().powi(2) / (256.0 * eff),
    )?;
    let ln = (ch.a - 5.0) * LN_2 + ln_density_scale(ch) - 2.0 * PI.ln() - 0.5 * mu * eff.ln()
        + ln_g(&spec, "ber_dpsk_ncfsk_meijer")?;
    Ok(ErrorRateResult::plain(ch, ln.exp(), Method::Meijer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_channel;
    use approx::assert_relative_eq;

    fn moderate() -> NlosChannel {
        build_channel(1.0, 1.0, (6.99, 1.05), (4.59, 1.23)).unwrap()
    }

    #[test]
    fn frozen_references_at_20_db() {
        let c = moderate();
        assert_relative_eq!(p_half_pi_meijer(&c, 100.0).unwrap(), 0.074_324_969_371_301_86, max_relative = 1e-9);
        let d = ber_dpsk_ncfsk_meijer(&c, 100.0, 1.0).unwrap().probability;
        assert_relative_eq!(d, 0.105_995_011_704_023_97, max_relative = 1e-9);
    }

    #[test]
    fn closed_form_matches_kernel_integral() {
        let c = moderate();
        for snr in [3.0, 100.0, 3000.0] {
            let closed = p_half_pi_meijer(&c, snr).unwrap();
            let integ = p_meijer_integral(&c, snr, PI / 2.0).unwrap();
            assert_relative_eq!(closed, integ, max_relative = 1e-7);
        }
    }

    #[test]
    fn ncfsk_is_dpsk_at_half_snr() {
        let c = moderate();
        for snr in [2.0, 50.0, 1e3] {
            let n = ber_dpsk_ncfsk_meijer(&c, snr, 2.0).unwrap().probability;
            let d = ber_dpsk_ncfsk_meijer(&c, snr / 2.0, 1.0).unwrap().probability;
            assert_eq!(n, d);
        }
    }

    #[test]
    fn nested_ranges_order() {
        let c = moderate();
        for snr in [1.0, 10.0, 100.0, 1e4] {
            let p2 = p_half_pi_meijer(&c, snr).unwrap();
            let p4 = p_quarter_pi_meijer(&c, snr).unwrap();
            assert!(p2 >= p4 && p4 >= 0.0);
        }
    }
}
