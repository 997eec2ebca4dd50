//! Single-scattering NLOS link geometry and power budget.
//!
//! The common volume is treated as a point where the transmitter beam axis
//! meets the receiver field-of-view axis. All lengths are metres and all
//! angles radians.

use std::f64::consts::PI;

use crate::channel::{build_channel, gg_params_from_rytov, NlosChannel};
use crate::error::{Error, Result};

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atmosphere {
    /// Absorption coefficient (1/m).
    pub k_a: f64,
    /// Rayleigh scattering coefficient (1/m).
    pub k_r: f64,
    /// Mie scattering coefficient (1/m).
    pub k_m: f64,
    pub gamma_ray: f64,
    pub g_asym: f64,
    pub f_mie: f64,
    /// Refractive-index structure constant (m^{−2/3}).
    pub cn2: f64,
}

impl Atmosphere {
    /// Coefficients given per kilometre.
    pub fn from_per_km(k_a: f64, k_r: f64, k_m: f64, gamma_ray: f64, g_asym: f64, f_mie: f64, cn2: f64) -> Result<Self> {
        let atm = Atmosphere {
            k_a: k_a * 1e-3,
            k_r: k_r * 1e-3,
            k_m: k_m * 1e-3,
            gamma_ray,
            g_asym,
            f_mie,
            cn2,
        };
        atm.validate()?;
        Ok(atm)
    }

    /// The 260 nm daytime atmosphere used throughout the examples.
    pub fn reference(cn2: f64) -> Self {
        Atmosphere::from_per_km(0.802, 0.266, 0.284, 0.017, 0.72, 0.5, cn2).expect("valid reference atmosphere")
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("k_a", self.k_a), ("k_r", self.k_r), ("k_m", self.k_m), ("cn2", self.cn2)];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain("Atmosphere", format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.k_s() > 0.0) {
            return Err(Error::domain("Atmosphere", "total scattering coefficient must be positive"));
        }
        if !(self.g_asym.abs() < 1.0) {
            return Err(Error::domain("Atmosphere", format!("|g| must be below 1, got {}", self.g_asym)));
        }
        Ok(())
    }

    pub fn k_s(&self) -> f64 {
        self.k_r + self.k_m
    }

    pub fn k_e(&self) -> f64 {
        self.k_a + self.k_s()
    }
}

/// Distances from the transmitter and receiver to the common volume, and
/// the scattering angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonVolume {
    pub r1: f64,
    pub r2: f64,
    pub theta_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Transmitter elevation.
    pub theta_t: f64,
    /// Full transmit beam divergence.
    pub beta_t: f64,
    /// Receiver elevation.
    pub theta_r: f64,
    /// Full receiver field of view.
    pub beta_r: f64,
    /// Ground distance between transmitter and receiver (m).
    pub baseline: f64,
    /// Receiver aperture area (m²).
    pub aperture: f64,
}

impl LinkGeometry {
    pub fn new(theta_t: f64, beta_t: f64, theta_r: f64, beta_r: f64, baseline: f64, aperture: f64) -> Result<Self> {
        let g = LinkGeometry {
            theta_t,
            beta_t,
            theta_r,
            beta_r,
            baseline,
            aperture,
        };
        for (name, v) in [("beta_t", beta_t), ("beta_r", beta_r)] {
            if !(v > 0.0 && v < PI) {
                return Err(Error::domain("LinkGeometry", format!("{name} must lie in (0, π), got {v}")));
            }
        }
        if !(baseline > 0.0) || !baseline.is_finite() {
            return Err(Error::domain("LinkGeometry", format!("baseline must be positive, got {baseline}")));
        }
        if !(aperture > 0.0) || !aperture.is_finite() {
            return Err(Error::domain("LinkGeometry", format!("aperture must be positive, got {aperture}")));
        }
        Ok(g)
    }

    pub fn common_volume(&self) -> Result<CommonVolume> {
        derive_common_volume(self)
    }
}

/// Law-of-sines triangle on the baseline.
pub fn derive_common_volume(g: &LinkGeometry) -> Result<CommonVolume> {
    let (t, r) = (g.theta_t, g.theta_r);
    if !(t > 0.0 && r > 0.0 && t < PI && r < PI) {
        return Err(Error::Geometry(format!("elevations must lie in (0, π), got ({t}, {r})")));
    }
    let s = t + r;
    if s >= PI - 1e-9 {
        return Err(Error::Geometry(format!(
            "axes at elevations {:.4}° and {:.4}° do not meet above the baseline",
            t.to_degrees(),
            r.to_degrees()
        )));
    }
    let k = g.baseline / s.sin();
    Ok(CommonVolume {
        r1: k * r.sin(),
        r2: k * t.sin(),
        theta_s: s,
    })
}

/// Rayleigh plus generalized Henyey-Greenstein phase function (1/sr) at
/// `mu = cos θ_s`.
pub fn phase_function(mu: f64, atm: &Atmosphere) -> Result<f64> {
    if !(mu.abs() <= 1.0) {
        return Err(Error::domain("phase_function", format!("|mu| must not exceed 1, got {mu}")));
    }
    let (gm, g, f) = (atm.gamma_ray, atm.g_asym, atm.f_mie);
    let ray = 3.0 * (1.0 + 3.0 * gm + (1.0 - gm) * mu * mu) / (16.0 * PI * (1.0 + 2.0 * gm));
    let g2 = 1.0 + g * g;
    let mie = (1.0 - g * g) / (4.0 * PI)
        * ((g2 - 2.0 * g * mu).powf(-1.5) + f * (3.0 * mu * mu - 1.0) / (2.0 * g2.powf(1.5)));
    let ks = atm.k_s();
    Ok(atm.k_r / ks * ray + atm.k_m / ks * mie)
}

/// Mean gain of the common-volume-to-receiver hop, `exp(−k_e r₂)·A_r/r₂²`.
pub fn e2_gain(atm: &Atmosphere, r2: f64, aperture: f64) -> Result<f64> {
    if !(r2 > 0.0) || !(aperture > 0.0) {
        return Err(Error::domain("e2_gain", format!("r2 and aperture must be positive, got ({r2}, {aperture})")));
    }
    Ok((-atm.k_e() * r2).exp() * aperture / (r2 * r2))
}

/// Mean scattered power at the common volume for transmit power `tx_power`.
///
/// `P_t·exp(−k_e r₁)·k_s·P(cos θ_s)·V_c/(Ω_T r₁²)` with transmit solid angle
/// `Ω_T = 2π(1 − cos(β_T/2))` and a common volume of beam cross-section times
/// the FOV-limited path length, `V_c = π(r₁ tan(β_T/2))²·2r₂ tan(β_R/2)/sin θ_s`.
pub fn omega_v(g: &LinkGeometry, atm: &Atmosphere, tx_power: f64) -> Result<f64> {
    if !(tx_power > 0.0) || !tx_power.is_finite() {
        return Err(Error::domain("omega_v", format!("transmit power must be positive, got {tx_power}")));
    }
    let cv = derive_common_volume(g)?;
    let omega_t = 2.0 * PI * (1.0 - (0.5 * g.beta_t).cos());
    let beam = cv.r1 * (0.5 * g.beta_t).tan();
    let vc = PI * beam * beam * (2.0 * cv.r2 * (0.5 * g.beta_r).tan() / cv.theta_s.sin());
    let p = phase_function(cv.theta_s.cos(), atm)?;
    Ok(tx_power * (-atm.k_e() * cv.r1).exp() * atm.k_s() * p * vc / (omega_t * cv.r1 * cv.r1))
}

/// Places transmitter and receiver on the foci of an ellipse of eccentricity
/// `e` with focal distance `baseline`, and the common volume on the ellipse
/// where the receiver axis has elevation `theta_r`. The total path
/// `r₁ + r₂ = baseline/e` is then independent of `theta_r`.
pub fn ellipse_configuration(
    e: f64,
    baseline: f64,
    theta_r: f64,
    beta_t: f64,
    beta_r: f64,
    aperture: f64,
) -> Result<LinkGeometry> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::domain("ellipse_configuration", format!("eccentricity must lie in (0, 1), got {e}")));
    }
    if !(theta_r > 0.0 && theta_r < PI) {
        return Err(Error::domain("ellipse_configuration", format!("receiver elevation {theta_r} is not above the baseline")));
    }
    let a = baseline / (2.0 * e);
    // Focal-radius form of the ellipse, measured from the receiver focus.
    let r2 = a * (1.0 - e * e) / (1.0 - e * theta_r.cos());
    let theta_t = (r2 * theta_r.sin()).atan2(baseline - r2 * theta_r.cos());
    LinkGeometry::new(theta_t, beta_t, theta_r, beta_r, baseline, aperture)
}

/// Mean electrical SNR of a photon-counting receiver,
/// `η_f η_r λ P_r / (h c B)`.
pub fn mean_snr(received_power: f64, filter_eta: f64, detector_eta: f64, wavelength: f64, bit_rate: f64) -> Result<f64> {
    let args = [
        ("received_power", received_power),
        ("filter_eta", filter_eta),
        ("detector_eta", detector_eta),
        ("wavelength", wavelength),
        ("bit_rate", bit_rate),
    ];
    for (name, v) in args {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain("mean_snr", format!("{name} must be positive, got {v}")));
        }
    }
    Ok(filter_eta * detector_eta * wavelength * received_power / (PLANCK * LIGHT_SPEED * bit_rate))
}

/// Gamma-Gamma shapes of the two hops from the plane-wave Rytov variance over
/// `r₁` and `r₂`.
pub fn link_shapes(g: &LinkGeometry, atm: &Atmosphere, wavelength: f64) -> Result<((f64, f64), (f64, f64))> {
    let cv = derive_common_volume(g)?;
    Ok((
        gg_params_from_rytov(atm.cn2, cv.r1, wavelength)?,
        gg_params_from_rytov(atm.cn2, cv.r2, wavelength)?,
    ))
}

/// The cascaded channel of a link.
pub fn nlos_channel(g: &LinkGeometry, atm: &Atmosphere, wavelength: f64, tx_power: f64) -> Result<NlosChannel> {
    let cv = derive_common_volume(g)?;
    let (l1, l2) = link_shapes(g, atm, wavelength)?;
    build_channel(omega_v(g, atm, tx_power)?, e2_gain(atm, cv.r2, g.aperture)?, l1, l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};
    use approx::assert_relative_eq;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn reference_geometry() -> LinkGeometry {
        LinkGeometry::new(deg(30.0), 8e-3, deg(80.0), deg(20.0), 1000.0, 1.77e-4).unwrap()
    }

    #[test]
    fn triangle_examples() {
        let cv = reference_geometry().common_volume().unwrap();
        assert!((cv.r1 - 1048.0).abs() < 0.05 && (cv.r2 - 532.1).abs() < 0.05, "{cv:?}");
        assert_relative_eq!(cv.theta_s, deg(110.0), max_relative = 1e-15);
        assert_relative_eq!(cv.r1 * deg(30.0).sin(), cv.r2 * deg(80.0).sin(), max_relative = 1e-12);
        let g = LinkGeometry::new(deg(45.0), 8e-3, deg(45.0), deg(20.0), 100.0, 1e-4).unwrap();
        let cv = g.common_volume().unwrap();
        assert_relative_eq!(cv.r1, 70.710_678_118_654_76, max_relative = 1e-12);
        assert_relative_eq!(cv.r2, cv.r1, max_relative = 1e-12);
        let g = LinkGeometry::new(deg(90.0), 8e-3, deg(90.0), deg(20.0), 100.0, 1e-4).unwrap();
        assert!(matches!(g.common_volume(), Err(Error::Geometry(_))));
    }

    #[test]
    fn phase_function_normalizes() {
        let cases = [
            Atmosphere::reference(1e-13),
            Atmosphere::from_per_km(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap(),
            Atmosphere::from_per_km(0.1, 0.2, 0.9, 0.05, -0.3, 1.0, 0.0).unwrap(),
            Atmosphere::from_per_km(0.1, 0.0, 0.9, 0.0, 0.9, 0.2, 0.0).unwrap(),
        ];
        for atm in cases {
            let total = integrate(
                |mu| phase_function(mu, &atm).unwrap(),
                -1.0,
                1.0,
                Tolerance::rel(1e-12),
            )
            .unwrap();
            assert_relative_eq!(2.0 * PI * total.value, 1.0, max_relative = 1e-6);
        }
        let ray = Atmosphere::from_per_km(0.0, 1.0, 0.0, 0.017, 0.0, 0.5, 0.0).unwrap();
        assert_eq!(phase_function(0.3, &ray).unwrap(), phase_function(-0.3, &ray).unwrap());
        assert!(phase_function(1.2, &ray).is_err());
    }

    #[test]
    fn phase_function_reference_point() {
        let atm = Atmosphere::reference(1e-13);
        let mu = deg(110.0).cos();
        let ks = 0.55e-3;
        let ray = 3.0 * (1.0 + 3.0 * 0.017 + 0.983 * mu * mu) / (16.0 * PI * 1.034);
        let g = 0.72f64;
        let mie = (1.0 - g * g) / (4.0 * PI)
            * ((1.0 + g * g - 2.0 * g * mu).powf(-1.5) + 0.5 * (3.0 * mu * mu - 1.0) / (2.0 * (1.0 + g * g).powf(1.5)));
        let want = 0.266e-3 / ks * ray + 0.284e-3 / ks * mie;
        assert_relative_eq!(phase_function(mu, &atm).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn e2_examples() {
        let atm = Atmosphere::reference(1e-13);
        assert_relative_eq!(atm.k_e(), 1.352e-3, max_relative = 1e-12);
        let v = e2_gain(&atm, 532.1, 1.77e-4).unwrap();
        assert!((v - 3.05e-10).abs() < 0.01e-10, "{v}");
        let clear = Atmosphere::from_per_km(0.0, 1e-9, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let a = e2_gain(&clear, 10.0, 2.0).unwrap();
        assert_relative_eq!(a, 0.02, max_relative = 1e-9);
        assert_relative_eq!(e2_gain(&clear, 20.0, 2.0).unwrap(), a / 4.0, max_relative = 1e-9);
    }

    #[test]
    fn omega_v_hand_evaluation() {
        // Lossless apart from scattering, θ_s = 90° with symmetric 45° elevations.
        let atm = Atmosphere::from_per_km(0.0, 1e-6, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let g = LinkGeometry::new(deg(45.0), 0.01, deg(45.0), 0.2, 100.0, 1e-4).unwrap();
        let r1 = 100.0 / 2f64.sqrt();
        let ks = 1e-9;
        let p = 3.0 / (16.0 * PI);
        let vc = PI * (r1 * 0.005f64.tan()).powi(2) * 2.0 * r1 * 0.1f64.tan();
        let omega_t = 2.0 * PI * (1.0 - 0.005f64.cos());
        let want = 2.0 * (-ks * r1).exp() * ks * p * vc / (omega_t * r1 * r1);
        assert_relative_eq!(omega_v(&g, &atm, 2.0).unwrap(), want, max_relative = 1e-12);
        assert_relative_eq!(omega_v(&g, &atm, 4.0).unwrap(), 2.0 * want, max_relative = 1e-15);
    }

    #[test]
    fn received_mean_falls_with_baseline() {
        let atm = Atmosphere::reference(1e-13);
        let mut prev = f64::INFINITY;
        for r in [100.0, 200.0, 400.0, 800.0, 1600.0] {
            let g = LinkGeometry::new(deg(30.0), 8e-3, deg(80.0), deg(20.0), r, 1.77e-4).unwrap();
            let ch = nlos_channel(&g, &atm, 260e-9, 1.0).unwrap();
            let cv = g.common_volume().unwrap();
            let prod = omega_v(&g, &atm, 1.0).unwrap() * e2_gain(&atm, cv.r2, g.aperture).unwrap();
            assert_relative_eq!(ch.omega_r, prod, max_relative = 1e-12);
            assert!(ch.omega_r < prev);
            prev = ch.omega_r;
        }
    }

    #[test]
    fn ellipse_keeps_total_path() {
        let e = 0.5f64.sqrt();
        for k in 1..36 {
            let g = ellipse_configuration(e, 200.0, deg(5.0 * k as f64), 8e-3, deg(20.0), 1e-4).unwrap();
            let cv = g.common_volume().unwrap();
            assert_relative_eq!(cv.r1 + cv.r2, 200.0 / e, max_relative = 1e-9);
        }
        let e = 3f64.sqrt() / 2.0;
        let g = ellipse_configuration(e, 1000.0, deg(30.0), 8e-3, deg(20.0), 1e-4).unwrap();
        let cv = g.common_volume().unwrap();
        assert_relative_eq!(cv.r1, cv.r2, max_relative = 1e-12);
        assert_relative_eq!(g.theta_t, g.theta_r, max_relative = 1e-12);
        assert!(ellipse_configuration(1.0, 1000.0, deg(30.0), 8e-3, deg(20.0), 1e-4).is_err());
        assert!(ellipse_configuration(e, 1000.0, deg(180.0), 8e-3, deg(20.0), 1e-4).is_err());
    }

    #[test]
    fn snr_bookkeeping() {
        // Photon arrival rate equal to the bit rate.
        let pr = PLANCK * LIGHT_SPEED / 260e-9 * 5000.0;
        assert_relative_eq!(mean_snr(pr, 0.1, 0.2, 260e-9, 5000.0).unwrap(), 0.02, max_relative = 1e-12);
        assert_relative_eq!(mean_snr(2.0 * pr, 0.1, 0.2, 260e-9, 5000.0).unwrap(), 0.04, max_relative = 1e-12);
        assert_relative_eq!(mean_snr(pr, 0.1, 0.2, 260e-9, 10000.0).unwrap(), 0.01, max_relative = 1e-12);
        assert!(mean_snr(0.0, 0.1, 0.2, 260e-9, 5000.0).is_err());
    }

    #[test]
    fn caption_shapes_from_geometry() {
        let ((a1, b1), (a2, b2)) = link_shapes(&reference_geometry(), &Atmosphere::reference(1e-13), 260e-9).unwrap();
        for (got, want) in [(a1, 6.99), (b1, 1.05), (a2, 4.59), (b2, 1.23)] {
            assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
        }
    }
}
