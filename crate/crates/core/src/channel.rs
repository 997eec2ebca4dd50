//! Cascaded Gamma-Gamma NLOS channel.
//!
//! Link 1 (transmitter to common volume) has shapes `(α₁, β₁)` and mean
//! `Ω_v`; link 2 (common volume to receiver) has shapes `(α₂, β₂)` and a
//! deterministic gain `E₂`, so the conditional mean at the receiver is
//! `p_v·E₂`. The received power density is available by direct quadrature of
//! the Bessel-K integral, through `G^{4,0}_{0,4}`, and as a four-branch power
//! series.

use crate::error::{Error, Result};
use crate::quad::{integrate_with_points, Tolerance};
use crate::specfun::dd::{self, Dd};
use crate::specfun::{
    ln_bessel_k, ln_gamma, meijer_g_residue, meijer_g_scaled, pole_collision_distance, ContourConfig, MeijerGSpec,
};

/// Shapes whose pairwise differences come closer than this to an integer are
/// perturbed before the channel is built.
pub const COLLISION_TRIGGER: f64 = 1e-5;
const PERTURB_STEP: f64 = 1e-6;
const PERTURB_ACCEPT: f64 = 5e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGammaParams {
    pub alpha: f64,
    pub beta: f64,
    pub mean_power: f64,
}

impl GammaGammaParams {
    pub fn new(alpha: f64, beta: f64, mean_power: f64) -> Result<Self> {
        check_shapes("gamma-gamma link", alpha, beta)?;
        if !(mean_power > 0.0) || !mean_power.is_finite() {
            return Err(Error::domain("GammaGammaParams", format!("mean power must be positive, got {mean_power}")));
        }
        Ok(GammaGammaParams {
            alpha,
            beta,
            mean_power,
        })
    }

    /// `E[X²]/E[X]² − 1`.
    pub fn scintillation_index(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta + 1.0 / (self.alpha * self.beta)
    }
}

fn check_shapes(what: &'static str, alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite() && beta > 0.0) {
        return Err(Error::domain(what, format!("shapes must be positive and finite, got ({alpha}, {beta})")));
    }
    if alpha <= beta {
        return Err(Error::domain(what, format!("requires alpha > beta, got ({alpha}, {beta})")));
    }
    Ok(())
}

/// Plane-wave Rytov variance `1.23·Cn²·k^{7/6}·L^{11/6}`.
pub fn rytov_variance(cn2: f64, path_length: f64, wavelength: f64) -> f64 {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    1.23 * cn2 * k.powf(7.0 / 6.0) * path_length.powf(11.0 / 6.0)
}

/// `(α, β)` from the Rytov variance of a plane wave.
pub fn gg_params_from_rytov(cn2: f64, path_length: f64, wavelength: f64) -> Result<(f64, f64)> {
    for (name, v) in [("cn2", cn2), ("path_length", path_length), ("wavelength", wavelength)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain("gg_params_from_rytov", format!("{name} must be positive, got {v}")));
        }
    }
    let s2 = rytov_variance(cn2, path_length, wavelength);
    let s125 = s2.powf(1.2);
    let alpha = 1.0 / (0.49 * s2 / (1.0 + 1.11 * s125).powf(7.0 / 6.0)).exp_m1();
    let beta = 1.0 / (0.51 * s2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0)).exp_m1();
    check_shapes("gg_params_from_rytov", alpha, beta)?;
    Ok((alpha, beta))
}

/// Natural log of the Gamma-Gamma density.
pub fn ln_gg_pdf(params: &GammaGammaParams, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(Error::domain("gg_pdf", format!("power must be positive, got {power}")));
    }
    let (a, b, om) = (params.alpha, params.beta, params.mean_power);
    let half = 0.5 * (a + b);
    let x = 2.0 * (a * b * power / om).sqrt();
    Ok(std::f64::consts::LN_2 + half * (a * b).ln() + (half - 1.0) * power.ln() - ln_gamma(a)? - ln_gamma(b)?
        - half * om.ln()
        + ln_bessel_k(a - b, x)?)
}

pub fn gg_pdf(params: &GammaGammaParams, power: f64) -> Result<f64> {
    ln_gg_pdf(params, power).map(f64::exp)
}

/// Shift applied to the shapes to move pole collisions out of the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    /// `[α₁, β₁, α₂, β₂]` as requested.
    pub original: [f64; 4],
    pub shift: [f64; 4],
    /// Closest approach of a pairwise shape difference to an integer, before and after.
    pub distance_before: f64,
    pub distance_after: f64,
}

/// One of the four power-series branches of the normalized density:
/// `coef · Σ_k H^k i^{e+k−1} / ((c₁)_k (c₂)_k (c₃)_k k!)`, with `H = hΩ_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBranch {
    pub exponent: f64,
    pub ln_coef: f64,
    pub sign: f64,
    pub poch: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlosChannel {
    pub link1: GammaGammaParams,
    pub link2_alpha: f64,
    pub link2_beta: f64,
    pub e2: f64,
    pub s: f64,
    pub a: f64,
    pub h: f64,
    pub omega_r: f64,
    ln_s: f64,
    pub perturbation: Option<Perturbation>,
}

/// Builds the cascaded channel, perturbing near-colliding shapes (see
/// [`NlosChannel::perturbation`]).
pub fn build_channel(omega_v: f64, e2: f64, link1: (f64, f64), link2: (f64, f64)) -> Result<NlosChannel> {
    check_shapes("build_channel link 1", link1.0, link1.1)?;
    check_shapes("build_channel link 2", link2.0, link2.1)?;
    if !(omega_v > 0.0 && omega_v.is_finite()) {
        return Err(Error::domain("build_channel", format!("omega_v must be positive, got {omega_v}")));
    }
    if !(e2 > 0.0 && e2.is_finite()) {
        return Err(Error::domain("build_channel", format!("e2 must be positive, got {e2}")));
    }
    let original = [link1.0, link1.1, link2.0, link2.1];
    let before = pole_collision_distance(&original);
    let mut shapes = original;
    let mut perturbation = None;
    if before < COLLISION_TRIGGER {
        let mut found = false;
        for trial in 1..=16 {
            let shift = [0.0, 1.0, 2.0, 3.0].map(|w| w * PERTURB_STEP * trial as f64);
            let cand: Vec<f64> = original.iter().zip(&shift).map(|(s, d)| s + d).collect();
            let after = pole_collision_distance(&cand);
            if after >= PERTURB_ACCEPT && cand[0] > cand[1] && cand[2] > cand[3] {
                shapes = [cand[0], cand[1], cand[2], cand[3]];
                perturbation = Some(Perturbation {
                    original,
                    shift,
                    distance_before: before,
                    distance_after: after,
                });
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::PoleCollision {
                detail: format!("no perturbation separated the shapes {original:?}"),
            });
        }
    }
    let [a1, b1, a2, b2] = shapes;
    let a = a1 + b1 - a2 - b2;
    let h = a1 * b1 * a2 * b2 / (omega_v * e2);
    let mu = 0.5 * (a2 + b2);
    let ln_gammas = ln_gamma(a1)? + ln_gamma(b1)? + ln_gamma(a2)? + ln_gamma(b2)?;
    let ln_s = (3.0 - a) * std::f64::consts::LN_2 + mu * h.ln() - ln_gammas;
    // Ω_r = 2^{a−3} s h^{−(μ+1)} Π Γ(shape + 1), which reduces to Ω_v·E₂.
    let ln_omega_r = (a - 3.0) * std::f64::consts::LN_2 + ln_s - (mu + 1.0) * h.ln() + ln_gamma(a1 + 1.0)?
        + ln_gamma(b1 + 1.0)?
        + ln_gamma(a2 + 1.0)?
        + ln_gamma(b2 + 1.0)?;
    Ok(NlosChannel {
        link1: GammaGammaParams::new(a1, b1, omega_v)?,
        link2_alpha: a2,
        link2_beta: b2,
        e2,
        s: ln_s.exp(),
        a,
        h,
        omega_r: ln_omega_r.exp(),
        ln_s,
        perturbation,
    })
}

impl NlosChannel {
    /// `[α₁, β₁, α₂, β₂]`
    pub fn shapes(&self) -> [f64; 4] {
        [self.link1.alpha, self.link1.beta, self.link2_alpha, self.link2_beta]
    }

    pub fn omega_v(&self) -> f64 {
        self.link1.mean_power
    }

    /// `(α₂ + β₂)/2`
    pub fn mu(&self) -> f64 {
        0.5 * (self.link2_alpha + self.link2_beta)
    }

    /// `h·Ω_r = α₁β₁α₂β₂`, the scale of the normalized density.
    pub fn h_omega(&self) -> f64 {
        self.shapes().iter().product()
    }

    pub fn ln_s(&self) -> f64 {
        self.ln_s
    }

    fn ln_gamma_shapes(&self) -> f64 {
        self.shapes().iter().map(|&x| ln_gamma(x).unwrap()).sum()
    }

    /// Lower parameters of `G^{4,0}_{0,4}` in the density.
    pub fn meijer_b(&self) -> [f64; 4] {
        let [a1, b1, a2, b2] = self.shapes();
        let s2 = a2 + b2;
        [
            (2.0 * b1 - s2) / 2.0,
            (2.0 * a1 - s2) / 2.0,
            (b2 - a2) / 2.0,
            (a2 - b2) / 2.0,
        ]
    }

    /// Density of the received power `p_r` (per watt) by quadrature of the
    /// Bessel-K product integral.
    pub fn pdf_quadrature(&self, power: f64) -> Result<f64> {
        self.ln_pdf_quadrature(power).map(f64::exp)
    }

    pub fn ln_pdf_quadrature(&self, power: f64) -> Result<f64> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::domain("pdf_quadrature", format!("power must be positive, got {power}")));
        }
        let [a1, b1, a2, b2] = self.shapes();
        let li = ln_k_product_integral(self.a, a1 - b1, a2 - b2, self.h * power)?;
        Ok(self.ln_s + (self.mu() - 1.0) * power.ln() + li)
    }

    /// Density of the normalized irradiance `i_n = p_r/Ω_r` from the quadrature route.
    pub fn pdf_quadrature_normalized(&self, i_n: f64) -> Result<f64> {
        Ok((self.ln_pdf_quadrature(i_n * self.omega_r)? + self.omega_r.ln()).exp())
    }

    /// `G^{4,0}_{0,4}` specification for the normalized density at `i_n`.
    pub fn meijer_spec(&self, i_n: f64) -> Result<MeijerGSpec> {
        MeijerGSpec::new(4, 0, vec![], self.meijer_b().to_vec(), self.h_omega() * i_n)
    }

    /// Normalized-irradiance density through the Meijer G form.
    pub fn pdf_meijer(&self, i_n: f64) -> Result<f64> {
        if !(i_n > 0.0) || !i_n.is_finite() {
            return Err(Error::domain("pdf_meijer", format!("irradiance must be positive, got {i_n}")));
        }
        let spec = self.meijer_spec(i_n)?;
        let ln_g = match meijer_g_scaled(&spec, &ContourConfig::default()) {
            Ok(g) if g.mantissa > 0.0 => g.ln_abs(),
            Ok(g) => {
                return Err(Error::Accuracy {
                    func: "pdf_meijer",
                    estimate: g.value(),
                    achieved: g.rel_error,
                })
            }
            // Far below the mode the contour cancels badly; the residue sum
            // converges fastest exactly there.
            Err(Error::Accuracy { .. }) if spec.z < 1.0 => {
                let g = meijer_g_residue(&spec)?;
                if !(g > 0.0) {
                    return Err(Error::Accuracy {
                        func: "pdf_meijer",
                        estimate: g,
                        achieved: f64::INFINITY,
                    });
                }
                g.ln()
            }
            Err(e) => return Err(e),
        };
        // 2^{a−3}·s·Ω_r^μ simplifies to (hΩ_r)^μ / ΠΓ.
        let mu = self.mu();
        let ln = mu * self.h_omega().ln() - self.ln_gamma_shapes() + (mu - 1.0) * i_n.ln() + ln_g;
        Ok(ln.exp())
    }

    /// The four series branches in the order (α₂, β₂, α₁, β₁).
    pub fn series_branches(&self) -> [SeriesBranch; 4] {
        let [a1, b1, a2, b2] = self.shapes();
        let ln_hw = self.h_omega().ln();
        let lg = self.ln_gamma_shapes();
        let make = |e: f64, partner: f64, o1: f64, o2: f64| {
            let mut sign = 1.0;
            let mut ln_coef = e * ln_hw - lg;
            for d in [partner - e, o1 - e, o2 - e] {
                let (l, s) = crate::specfun::ln_gamma_signed(d).expect("shapes separated from collisions");
                ln_coef += l;
                sign *= s;
            }
            SeriesBranch {
                exponent: e,
                ln_coef,
                sign,
                poch: [1.0 + e - partner, 1.0 + e - o1, 1.0 + e - o2],
            }
        };
        [
            make(a2, b2, a1, b1),
            make(b2, a2, a1, b1),
            make(a1, b1, a2, b2),
            make(b1, a1, a2, b2),
        ]
    }

    /// Normalized density from the four truncated power series (terms `k = 0..=J`),
    /// summed in double-double arithmetic.
    pub fn pdf_series(&self, i_n: f64, terms: usize) -> Result<f64> {
        if !(i_n > 0.0) || !i_n.is_finite() {
            return Err(Error::domain("pdf_series", format!("irradiance must be positive, got {i_n}")));
        }
        let shapes = self.shapes().map(Dd::new);
        let [a1, b1, a2, b2] = shapes;
        let hw = a1 * b1 * a2 * b2;
        let ln_hw = hw.ln();
        let x = Dd::new(i_n);
        let ln_x = x.ln();
        let zx = hw * x;
        let mut lg = Dd::ZERO;
        for s in shapes {
            lg = lg + dd::ln_gamma_signed(s).expect("positive shape").0;
        }
        let mut total = Dd::ZERO;
        for (e, partner, o1, o2) in [(a2, b2, a1, b1), (b2, a2, a1, b1), (a1, b1, a2, b2), (b1, a1, a2, b2)] {
            let mut ln_c = e * ln_hw - lg + (e - 1.0) * ln_x;
            let mut sign = 1.0;
            for d in [partner - e, o1 - e, o2 - e] {
                let (l, s) = dd::ln_gamma_signed(d).ok_or_else(|| Error::PoleCollision {
                    detail: "series branch exponents differ by an integer".into(),
                })?;
                ln_c = ln_c + l;
                sign *= s;
            }
            let c = [Dd::ONE + e - partner, Dd::ONE + e - o1, Dd::ONE + e - o2];
            let mut term = Dd::ONE;
            let mut sum = Dd::ONE;
            for k in 0..terms {
                let kf = k as f64;
                term = term * zx / ((c[0] + kf) * (c[1] + kf) * (c[2] + kf) * (kf + 1.0));
                sum = sum + term;
            }
            total = total + ln_c.exp() * sum * sign;
        }
        let v = total.to_f64();
        if !v.is_finite() {
            return Err(Error::Accuracy {
                func: "pdf_series",
                estimate: v,
                achieved: f64::INFINITY,
            });
        }
        Ok(v)
    }

    /// `Ξ(x)` for the unnormalized power series in `p_r`.
    pub fn xi(&self, x: f64) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s2 = a2 + b2;
        let (l1, g1) = crate::specfun::ln_gamma_signed(-x).unwrap_or((f64::NAN, 1.0));
        let (l2, g2) = crate::specfun::ln_gamma_signed((2.0 * a1 - s2 - x) / 2.0).unwrap_or((f64::NAN, 1.0));
        let (l3, g3) = crate::specfun::ln_gamma_signed((2.0 * b1 - s2 - x) / 2.0).unwrap_or((f64::NAN, 1.0));
        let ln = self.ln_s + (self.a - 2.0 * x - 3.0) * std::f64::consts::LN_2 + l1 + l2 + l3
            + 0.5 * x * (16.0 * self.h).ln();
        g1 * g2 * g3 * ln.exp()
    }

    /// `Θ(x)`
    pub fn theta(&self, x: f64) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s2 = a2 + b2;
        gamma_or_nan(1.0 - (2.0 * a1 - s2 - x) / 2.0) * gamma_or_nan(1.0 - (2.0 * b1 - s2 - x) / 2.0)
    }

    /// `a_k(x) = Γ(1+x)Θ(x)h^k / (Γ(1+x+k)Θ(x+2k)k!)`, evaluated through Pochhammer ratios.
    pub fn a_k(&self, x: f64, k: usize) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s2 = a2 + b2;
        let u1 = 1.0 - (2.0 * a1 - s2 - x) / 2.0;
        let u2 = 1.0 - (2.0 * b1 - s2 - x) / 2.0;
        pochhammer_term(self.h, [1.0 + x, u1, u2], k)
    }

    /// `Λ(x)`
    pub fn lambda(&self, x: f64) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s1 = a1 + b1;
        let (l1, g1) = crate::specfun::ln_gamma_signed(-x).unwrap_or((f64::NAN, 1.0));
        let (l2, g2) = crate::specfun::ln_gamma_signed((2.0 * a2 - s1 - x) / 2.0).unwrap_or((f64::NAN, 1.0));
        let (l3, g3) = crate::specfun::ln_gamma_signed((2.0 * b2 - s1 - x) / 2.0).unwrap_or((f64::NAN, 1.0));
        let ln = self.ln_s + (-self.a - 2.0 * x - 3.0) * std::f64::consts::LN_2 + l1 + l2 + l3
            + 0.5 * (self.a + x) * (16.0 * self.h).ln();
        g1 * g2 * g3 * ln.exp()
    }

    /// `Ψ(x)`
    pub fn psi(&self, x: f64) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s1 = a1 + b1;
        gamma_or_nan(1.0 + (s1 - 2.0 * a2 + x) / 2.0) * gamma_or_nan(1.0 + (s1 - 2.0 * b2 + x) / 2.0)
    }

    /// `b_k(x) = Γ(1+x)Ψ(x)h^k / (Γ(1+x+k)Ψ(x+2k)k!)`
    pub fn b_k(&self, x: f64, k: usize) -> f64 {
        let [a1, b1, a2, b2] = self.shapes();
        let s1 = a1 + b1;
        let v1 = 1.0 + (s1 - 2.0 * a2 + x) / 2.0;
        let v2 = 1.0 + (s1 - 2.0 * b2 + x) / 2.0;
        pochhammer_term(self.h, [1.0 + x, v1, v2], k)
    }
}

fn gamma_or_nan(x: f64) -> f64 {
    crate::specfun::gamma(x).unwrap_or(f64::NAN)
}

/// `h^k / ((c₁)_k (c₂)_k (c₃)_k k!)`
fn pochhammer_term(h: f64, c: [f64; 3], k: usize) -> f64 {
    let mut t = 1.0;
    for j in 0..k {
        let jf = j as f64;
        t *= h / ((c[0] + jf) * (c[1] + jf) * (c[2] + jf) * (jf + 1.0));
    }
    t
}

/// `ln ∫₀^∞ t^{a−1} K_{ν₁}(t) K_{ν₂}(4√(hp)/t) dt`.
///
/// With `t = t*·e^u`, `t* = 2(hp)^{1/4}`, both Bessel arguments become
/// `t*·e^{±u}`; the log-integrand is scanned for its peak and the tails are
/// cut where it has dropped by 45 nats.
fn ln_k_product_integral(a: f64, nu1: f64, nu2: f64, hp: f64) -> Result<f64> {
    let ts = 2.0 * hp.powf(0.25);
    let lts = ts.ln();
    let g = |u: f64| -> f64 {
        let x1 = ts * u.exp();
        let x2 = ts * (-u).exp();
        match (ln_bessel_k(nu1, x1), ln_bessel_k(nu2, x2)) {
            (Ok(k1), Ok(k2)) => a * (lts + u) + k1 + k2,
            _ => f64::NEG_INFINITY,
        }
    };
    let span = 40.0 + lts.abs();
    let step = 0.25;
    let n = (2.0 * span / step).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let u = -span + i as f64 * step;
        let v = g(u);
        if v > best.0 {
            best = (v, u);
        }
        vals.push((u, v));
    }
    let (peak, u_peak) = best;
    if !peak.is_finite() {
        return Err(Error::Accuracy {
            func: "pdf_quadrature",
            estimate: 0.0,
            achieved: f64::INFINITY,
        });
    }
    let cut = peak - 45.0;
    let first = vals.iter().position(|&(_, v)| v > cut).unwrap_or(0);
    let last = vals.iter().rposition(|&(_, v)| v > cut).unwrap_or(n);
    let lo = vals[first.saturating_sub(1)].0;
    let hi = vals[(last + 1).min(n)].0;
    let r = integrate_with_points(
        |u| (g(u) - peak).exp(),
        lo,
        hi,
        &[u_peak, 0.0],
        Tolerance::rel(1e-12).with_max_intervals(4000),
    )?;
    Ok(peak + r.value.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_relative_eq;

    fn moderate() -> NlosChannel {
        build_channel(1.0, 1.0, (6.99, 1.05), (4.59, 1.23)).unwrap()
    }

    #[test]
    fn rytov_reproduces_caption_shapes() {
        let (a, b) = gg_params_from_rytov(1e-13, 1047.9, 260e-9).unwrap();
        assert!((a / 6.99 - 1.0).abs() < 0.02 && (b / 1.05 - 1.0).abs() < 0.02, "{a} {b}");
        let (a, b) = gg_params_from_rytov(1e-13, 532.1, 260e-9).unwrap();
        assert!((a / 4.59 - 1.0).abs() < 0.02 && (b / 1.23 - 1.0).abs() < 0.02, "{a} {b}");
    }

    #[test]
    fn rytov_weak_limit() {
        // Cn² giving σ_R² = 1e-6.
        let cn2 = 1e-6 / rytov_variance(1.0, 500.0, 260e-9);
        assert_relative_eq!(rytov_variance(cn2, 500.0, 260e-9), 1e-6, max_relative = 1e-12);
        let (a, b) = gg_params_from_rytov(cn2, 500.0, 260e-9).unwrap();
        assert!(a > 1e4 && b > 1e4);
        assert!(gg_params_from_rytov(0.0, 500.0, 260e-9).is_err());
        assert!(gg_params_from_rytov(1e-13, -1.0, 260e-9).is_err());
    }

    #[test]
    fn gg_pdf_moments() {
        let p = GammaGammaParams::new(6.99, 1.05, 1.0).unwrap();
        let mass = integrate(
            |u: f64| gg_pdf(&p, u.exp()).unwrap() * u.exp(),
            -40.0,
            6.0,
            Tolerance::rel(1e-12),
        )
        .unwrap();
        assert_relative_eq!(mass.value, 1.0, max_relative = 1e-8);
        let p = GammaGammaParams::new(4.59, 1.23, 2.5).unwrap();
        let mean = integrate(
            |u: f64| gg_pdf(&p, u.exp()).unwrap() * (2.0 * u).exp(),
            -40.0,
            7.0,
            Tolerance::rel(1e-12),
        )
        .unwrap();
        assert_relative_eq!(mean.value, 2.5, max_relative = 1e-8);
        assert!(gg_pdf(&p, 0.0).is_err());
    }

    #[test]
    fn gg_pdf_matches_gamma_mixture() {
        // X·Y with X ~ Gamma(α, mean 1) and Y ~ Gamma(β, mean Ω): mix over X.
        let (al, be, om) = (2.0, 1.1, 1.0);
        let p = GammaGammaParams::new(al, be, om).unwrap();
        let x = 1.0;
        let gamma_pdf = |v: f64, k: f64, mean: f64| {
            let th = mean / k;
            ((k - 1.0) * v.ln() - v / th - ln_gamma(k).unwrap() - k * th.ln()).exp()
        };
        let mix = integrate(
            |u: f64| {
                let y = u.exp();
                gamma_pdf(y, al, 1.0) * gamma_pdf(x, be, om * y) * y
            },
            -40.0,
            5.0,
            Tolerance::rel(1e-12),
        )
        .unwrap();
        assert_relative_eq!(gg_pdf(&p, x).unwrap(), mix.value, max_relative = 1e-10);
    }

    #[test]
    fn channel_constants() {
        let c = build_channel(1.0, 1.0, (2.0, 1.1), (2.0, 1.1)).unwrap();
        // Identical links collide (zero differences) and are nudged apart.
        assert!(c.perturbation.is_some());
        assert!(c.a.abs() < 1e-5);
        let c = moderate();
        assert_relative_eq!(c.omega_r, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.h, 6.99 * 1.05 * 4.59 * 1.23, max_relative = 1e-15);
        let c2 = build_channel(2.0, 1.0, (6.99, 1.05), (4.59, 1.23)).unwrap();
        assert_relative_eq!(c2.omega_r, 2.0 * c.omega_r, max_relative = 1e-12);
        let c3 = build_channel(3e-9, 2e-10, (6.99, 1.05), (4.59, 1.23)).unwrap();
        assert_relative_eq!(c3.omega_r, 6e-19, max_relative = 1e-12);
        assert!(c.perturbation.is_none());
    }

    #[test]
    fn rejects_alpha_not_above_beta() {
        assert!(build_channel(1.0, 1.0, (1.0, 1.0), (4.59, 1.23)).is_err());
        assert!(build_channel(1.0, 1.0, (6.99, 1.05), (1.2, 4.0)).is_err());
        assert!(GammaGammaParams::new(1.0, 2.0, 1.0).is_err());
        assert!(build_channel(0.0, 1.0, (6.99, 1.05), (4.59, 1.23)).is_err());
    }

    #[test]
    fn collisions_are_perturbed_and_recorded() {
        let c = build_channel(1.0, 1.0, (4.0, 2.0), (3.5, 1.5)).unwrap();
        let p = c.perturbation.expect("integer differences must be perturbed");
        assert!(p.distance_before < 1e-12 && p.distance_after >= 5e-7);
        assert_eq!(p.original, [4.0, 2.0, 3.5, 1.5]);
        let v1 = c.pdf_series(1.0, 80).unwrap();
        let v2 = c.pdf_quadrature_normalized(1.0).unwrap();
        assert_relative_eq!(v1, v2, max_relative = 1e-6);
    }

    #[test]
    fn meijer_density_far_below_the_mode() {
        // The contour cancels here; the residue fallback must still agree.
        let c = moderate();
        for i in [(-40f64).exp(), (-60f64).exp()] {
            assert_relative_eq!(c.pdf_meijer(i).unwrap(), c.pdf_quadrature_normalized(i).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn frozen_reference_values() {
        let c = moderate();
        for (i, want) in [(1.0, 0.216_444_022_152_758_48), (10.0, 0.001_967_975_837_908_087_8), (1e-3, 4.780_178_424_831_904)] {
            assert_relative_eq!(c.pdf_meijer(i).unwrap(), want, max_relative = 1e-9);
            assert_relative_eq!(c.pdf_series(i, 60).unwrap(), want, max_relative = 1e-9);
            assert_relative_eq!(c.pdf_quadrature_normalized(i).unwrap(), want, max_relative = 1e-9);
        }
    }

    #[test]
    fn coefficient_form_series_matches_double_double_sum() {
        // Unnormalized series in p_r with Ξ, a_k, Λ, b_k at Ω_v = E₂ = 1 (so p_r = i_n).
        let c = moderate();
        let [a1, b1, a2, b2] = c.shapes();
        let p: f64 = 0.7;
        let mut total = 0.0;
        for k in 0..40 {
            let kf = k as f64;
            total += c.xi(a2 - b2) * c.a_k(a2 - b2, k) * p.powf(kf + a2 - 1.0)
                + c.xi(b2 - a2) * c.a_k(b2 - a2, k) * p.powf(kf + b2 - 1.0)
                + c.lambda(a1 - b1) * c.b_k(a1 - b1, k) * p.powf(kf + a1 - 1.0)
                + c.lambda(b1 - a1) * c.b_k(b1 - a1, k) * p.powf(kf + b1 - 1.0);
        }
        assert_relative_eq!(total, c.pdf_series(p, 40).unwrap(), max_relative = 1e-10);
        // a_k through the Θ ratio of its definition.
        let x = a2 - b2;
        let k = 3;
        let direct = crate::specfun::gamma(1.0 + x).unwrap() * c.theta(x) * c.h.powi(k as i32)
            / (crate::specfun::gamma(1.0 + x + k as f64).unwrap() * c.theta(x + 2.0 * k as f64) * 6.0);
        assert_relative_eq!(c.a_k(x, k), direct, max_relative = 1e-12);
        let x = a1 - b1;
        let direct = crate::specfun::gamma(1.0 + x).unwrap() * c.psi(x) * c.h.powi(k as i32)
            / (crate::specfun::gamma(1.0 + x + k as f64).unwrap() * c.psi(x + 2.0 * k as f64) * 6.0);
        assert_relative_eq!(c.b_k(x, k), direct, max_relative = 1e-12);
    }

    #[test]
    fn branches_match_series_leading_terms() {
        let c = moderate();
        let i: f64 = 0.3;
        let lead: f64 = c
            .series_branches()
            .iter()
            .map(|b| b.sign * (b.ln_coef + (b.exponent - 1.0) * i.ln()).exp())
            .sum();
        assert_relative_eq!(lead, c.pdf_series(i, 0).unwrap(), max_relative = 1e-12);
    }
}
