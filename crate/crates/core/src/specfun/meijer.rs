//! Meijer G-function `G^{m,n}_{p,q}(z | a; b)` for real parameters and `z > 0`.
//!
//! Two independent routes: trapezoidal quadrature of the Mellin–Barnes
//! integral along a vertical line, and the sum of residues at the poles of the
//! `Γ(b_j + t)` factors (carried out in double-double arithmetic because the
//! branch sums cancel heavily for large `z`).

use num_complex::Complex64;
use std::f64::consts::PI;

use super::dd::{self, Dd};
use super::gamma::ln_gamma_complex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub z: f64,
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>, z: f64) -> Result<Self> {
        let spec = MeijerGSpec { m, n, a, b, z };
        spec.validate()?;
        Ok(spec)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (p, q) = (self.p(), self.q());
        if self.m > q || self.n > p || p > q {
            return Err(Error::domain(
                "meijer_g",
                format!("invalid orders m={} n={} p={p} q={q}", self.m, self.n),
            ));
        }
        if !(self.z > 0.0) || !self.z.is_finite() {
            return Err(Error::domain("meijer_g", format!("argument must be positive, got {}", self.z)));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::domain("meijer_g", "non-finite parameter"));
        }
        Ok(())
    }

    /// Open interval of admissible contour offsets: right of every pole of
    /// `Γ(b_j + t)` (j ≤ m), left of every pole of `Γ(1 − a_j − t)` (j ≤ n).
    pub fn strip(&self) -> (f64, f64) {
        let lo = self.b[..self.m].iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.a[..self.n].iter().map(|a| 1.0 - a).fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    fn ln_integrand(&self, t: Complex64) -> Option<Complex64> {
        let mut acc = -t * self.z.ln();
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_complex(b + t).ok()?;
            } else {
                // Γ in the denominator: a pole there makes the integrand vanish.
                acc -= ln_gamma_complex(1.0 - b - t).ok()?;
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_complex(1.0 - a - t).ok()?;
            } else {
                acc -= ln_gamma_complex(a + t).ok()?;
            }
        }
        Some(acc)
    }

    fn ln_integrand_real(&self, c: f64) -> f64 {
        self.ln_integrand(Complex64::new(c, 0.0))
            .map(|l| l.re)
            .unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Real part of the contour; `None` picks it automatically.
    pub offset: Option<f64>,
    /// Initial truncation height.
    pub height: f64,
    /// Nodes across `[-height, height]`.
    pub nodes: usize,
    pub rel_tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            offset: None,
            height: 40.0,
            nodes: 2048,
            rel_tol: 1e-10,
        }
    }
}

impl ContourConfig {
    pub fn with_offset(mut self, c: f64) -> Self {
        self.offset = Some(c);
        self
    }
}

fn distance_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Smallest distance from an integer over all pairwise differences of `b`.
pub fn pole_collision_distance(b: &[f64]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            d = d.min(distance_to_integer(b[i] - b[j]));
        }
    }
    d
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-6 * (1.0 + lo.abs()) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Contour offset used when none is configured.
pub fn default_offset(spec: &MeijerGSpec) -> Result<f64> {
    let (lo, hi) = spec.strip();
    if !(lo < hi) {
        return Err(Error::domain("meijer_g", format!("no separating contour: strip ({lo}, {hi}) is empty")));
    }
    if hi.is_finite() && lo.is_finite() {
        // Lowest point of the integrand on the real axis keeps cancellation
        // along the contour small; stay clear of the poles on both sides.
        let margin = (0.25 * (hi - lo)).min(0.5);
        return Ok(golden_min(|c| spec.ln_integrand_real(c), lo + margin, hi - margin));
    }
    if hi.is_finite() {
        return Ok(hi - 0.5);
    }
    // n = 0: sit at the real saddle of |integrand| so the integral is not
    // oscillatory, but keep clear of the rightmost left pole.
    let base = if lo.is_finite() { lo } else { 0.0 };
    let left = base + 0.5;
    let right = left + 60.0 + spec.z.ln().abs();
    let c = golden_min(|c| spec.ln_integrand_real(c), left, right);
    Ok(c.max(left))
}

/// Result of the contour route: `value = mantissa · e^{ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub ln_scale: f64,
    pub rel_error: f64,
}

impl ScaledValue {
    pub fn value(&self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }
}

/// Meijer G by contour quadrature, returned in log-scaled form.
pub fn meijer_g_scaled(spec: &MeijerGSpec, cfg: &ContourConfig) -> Result<ScaledValue> {
    spec.validate()?;
    let (p, q) = (spec.p() as f64, spec.q() as f64);
    if (spec.m + spec.n) as f64 - 0.5 * (p + q) <= 0.0 {
        return Err(Error::domain(
            "meijer_g",
            "vertical contour does not converge (need m + n > (p + q)/2)",
        ));
    }
    let (lo, hi) = spec.strip();
    let c = match cfg.offset {
        Some(c) => {
            if !(c > lo && c < hi) {
                return Err(Error::domain("meijer_g", format!("offset {c} outside admissible strip ({lo}, {hi})")));
            }
            c
        }
        None => default_offset(spec)?,
    };
    let pole_gap = (c - lo).min(hi - c);
    if pole_gap < 1e-9 {
        return Err(Error::domain("meijer_g", "contour passes within 1e-9 of a pole"));
    }

    let scale = spec.ln_integrand_real(c);
    // (Re of the scaled integrand, its modulus)
    let eval = |y: f64| -> (f64, f64) {
        match spec.ln_integrand(Complex64::new(c, y)) {
            Some(l) => {
                let w = (l - scale).exp();
                (w.re, w.norm())
            }
            None => (0.0, 0.0),
        }
    };

    // Trapezoid error decays like exp(-2π·gap/h); aim for e^{-40} at the start.
    let mut h = 2.0 * cfg.height / cfg.nodes as f64;
    h = h.min(2.0 * PI * pole_gap.min(1.0) / 40.0);

    // Nodes on y ≥ 0; the integrand is conjugate-symmetric.
    let mut height = cfg.height;
    let sweep = |h: f64, offset: f64, height: f64| -> (f64, f64, f64) {
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut quiet = 0;
        let mut last = 0.0;
        let mut k = 0usize;
        loop {
            let y = offset + k as f64 * h;
            if y > height {
                break;
            }
            let (v, modulus) = eval(y);
            let w = if y == 0.0 { 0.5 } else { 1.0 };
            sum += w * v;
            abs_sum += w * v.abs();
            last = modulus;
            if last < 1e-18 && y > 1.0 {
                quiet += 1;
                if quiet >= 16 {
                    last = 0.0;
                    break;
                }
            } else {
                quiet = 0;
            }
            k += 1;
        }
        (sum, abs_sum, last)
    };

    let (mut sum, mut abs_sum, mut tail) = sweep(h, 0.0, height);
    while tail > 1e-16 {
        height *= 2.0;
        if height > 1e4 {
            return Err(Error::Accuracy {
                func: "meijer_g",
                estimate: sum * h / PI * scale.exp(),
                achieved: tail,
            });
        }
        let r = sweep(h, 0.0, height);
        sum = r.0;
        abs_sum = r.1;
        tail = r.2;
    }

    let mut integral = sum * h;
    let mut err = f64::INFINITY;
    // Refinement: halve h, add the new midpoints.
    for _ in 0..8 {
        let half = 0.5 * h;
        let (mid, mid_abs, _) = sweep(h, half, height);
        let refined = 0.5 * integral + half * mid;
        abs_sum += mid_abs;
        err = (refined - integral).abs();
        integral = refined;
        h = half;
        let floor = 64.0 * f64::EPSILON * abs_sum * h;
        if err <= cfg.rel_tol * integral.abs() || err <= floor {
            err = err.max(floor);
            break;
        }
    }
    let rel_error = err / integral.abs();
    if !(rel_error <= 1e3 * cfg.rel_tol.max(1e-12)) {
        return Err(Error::Accuracy {
            func: "meijer_g",
            estimate: integral / PI * scale.exp(),
            achieved: rel_error,
        });
    }
    Ok(ScaledValue {
        mantissa: integral / PI,
        ln_scale: scale,
        rel_error,
    })
}

/// Meijer G by contour quadrature.
pub fn meijer_g(spec: &MeijerGSpec, cfg: &ContourConfig) -> Result<f64> {
    meijer_g_scaled(spec, cfg).map(|v| v.value())
}

/// Meijer G as a sum of residues at the poles of `Γ(b_j + t)`, j ≤ m.
/// Requires simple poles; differences among those `b_j` within 1e-9 of an
/// integer are rejected as pole collisions.
pub fn meijer_g_residue(spec: &MeijerGSpec) -> Result<f64> {
    spec.validate()?;
    let (p, q, m, n) = (spec.p(), spec.q(), spec.m, spec.n);
    if p == q && spec.z >= 1.0 {
        return Err(Error::domain("meijer_g", "residue series needs z < 1 when p = q"));
    }
    let collision = pole_collision_distance(&spec.b[..m]);
    if collision < 1e-9 {
        return Err(Error::PoleCollision {
            detail: format!(
                "lower parameters differ by an integer to within {collision:.1e}; perturb the inputs"
            ),
        });
    }
    let sign_z = if (p + m + n) % 2 == 0 { 1.0 } else { -1.0 };
    let ln_z = Dd::new(spec.z).ln();
    let a: Vec<Dd> = spec.a.iter().map(|&v| Dd::new(v)).collect();
    let b: Vec<Dd> = spec.b.iter().map(|&v| Dd::new(v)).collect();

    let mut total = Dd::ZERO;
    for h in 0..m {
        let bh = b[h];
        let mut ln_c = bh * ln_z;
        let mut sign = 1.0;
        let mut vanishes = false;
        for j in 0..m {
            if j != h {
                let (l, s) = dd::ln_gamma_signed(b[j] - bh).expect("excluded by collision check");
                ln_c = ln_c + l;
                sign *= s;
            }
        }
        for aj in &a[..n] {
            match dd::ln_gamma_signed(Dd::ONE + bh - *aj) {
                Some((l, s)) => {
                    ln_c = ln_c + l;
                    sign *= s;
                }
                None => {
                    return Err(Error::domain("meijer_g", "upper and lower poles coincide"));
                }
            }
        }
        for bj in &b[m..] {
            match dd::ln_gamma_signed(Dd::ONE + bh - *bj) {
                Some((l, s)) => {
                    ln_c = ln_c - l;
                    sign *= s;
                }
                None => vanishes = true,
            }
        }
        for aj in &a[n..] {
            match dd::ln_gamma_signed(*aj - bh) {
                Some((l, s)) => {
                    ln_c = ln_c - l;
                    sign *= s;
                }
                None => vanishes = true,
            }
        }
        if vanishes {
            continue;
        }
        // Generalized hypergeometric tail Σ_k Π(1+b_h−a_j)_k / Π_{j≠h}(1+b_h−b_j)_k (±z)^k / k!
        let zd = Dd::new(spec.z) * sign_z;
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut k = 0usize;
        let mut settled = 0;
        loop {
            let kf = k as f64;
            let mut num = zd;
            for aj in &a {
                num = num * (Dd::ONE + bh - *aj + kf);
            }
            let mut den = Dd::new(kf + 1.0);
            for (j, bj) in b.iter().enumerate() {
                if j != h {
                    den = den * (Dd::ONE + bh - *bj + kf);
                }
            }
            if den.hi == 0.0 {
                return Err(Error::domain("meijer_g", "residue series hit a zero denominator"));
            }
            term = term * num / den;
            sum = sum + term;
            k += 1;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                settled += 1;
                if settled >= 3 {
                    break;
                }
            } else {
                settled = 0;
            }
            if term.hi == 0.0 {
                break;
            }
            if k > 20_000 {
                return Err(Error::Accuracy {
                    func: "meijer_g_residue",
                    estimate: total.to_f64(),
                    achieved: (term / sum).to_f64().abs(),
                });
            }
        }
        let coef = ln_c.exp() * sign;
        total = total + coef * sum;
    }
    Ok(total.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_k;
    use approx::assert_relative_eq;

    fn cascade_spec(a1: f64, b1: f64, a2: f64, b2: f64, z: f64) -> MeijerGSpec {
        let s2 = a2 + b2;
        MeijerGSpec::new(
            4,
            0,
            vec![],
            vec![(2.0 * b1 - s2) / 2.0, (2.0 * a1 - s2) / 2.0, (b2 - a2) / 2.0, (a2 - b2) / 2.0],
            z,
        )
        .unwrap()
    }

    #[test]
    fn exponential_reduction() {
        for z in [0.1, 1.0, 2.0, 10.0] {
            let spec = MeijerGSpec::new(1, 0, vec![], vec![0.0], z).unwrap();
            let g = meijer_g(&spec, &ContourConfig::default()).unwrap();
            assert_relative_eq!(g, (-z).exp(), max_relative = 1e-10);
            assert_relative_eq!(meijer_g_residue(&spec).unwrap(), (-z).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn bessel_reduction() {
        // G^{2,0}_{0,2}(x²/4 | ν/2, −ν/2) = 2 K_ν(x)
        let spec = MeijerGSpec::new(2, 0, vec![], vec![0.5, -0.5], 0.25).unwrap();
        let g = meijer_g(&spec, &ContourConfig::default()).unwrap();
        assert_relative_eq!(g, 2.0 * bessel_k(1.0, 1.0).unwrap(), max_relative = 1e-10);
        assert_relative_eq!(g, 1.203_814_460_394_469_2, max_relative = 1e-10);
        // Integer order is a double pole: the residue route refuses it.
        assert!(matches!(meijer_g_residue(&spec), Err(Error::PoleCollision { .. })));
        // Non-integer order: both routes.
        for (nu, x) in [(0.37, 0.8), (2.4, 3.0), (5.94, 12.0)] {
            let spec = MeijerGSpec::new(2, 0, vec![], vec![nu / 2.0, -nu / 2.0], x * x / 4.0).unwrap();
            let k2 = 2.0 * bessel_k(nu, x).unwrap();
            assert_relative_eq!(meijer_g(&spec, &ContourConfig::default()).unwrap(), k2, max_relative = 1e-10);
            assert_relative_eq!(meijer_g_residue(&spec).unwrap(), k2, max_relative = 1e-10);
        }
    }

    #[test]
    fn routes_agree_on_cascaded_pattern() {
        for z in [1e-3, 0.1, 1.0, 30.0, 400.0] {
            let spec = cascade_spec(6.99, 1.05, 4.59, 1.23, z);
            let c = meijer_g(&spec, &ContourConfig::default()).unwrap();
            let r = meijer_g_residue(&spec).unwrap();
            assert_relative_eq!(c, r, max_relative = 1e-9);
        }
    }

    #[test]
    fn offset_independence() {
        let spec = cascade_spec(6.99, 1.05, 4.59, 1.23, 1.0);
        let (lo, _) = spec.strip();
        let g1 = meijer_g(&spec, &ContourConfig::default().with_offset(lo + 0.4)).unwrap();
        let g2 = meijer_g(&spec, &ContourConfig::default().with_offset(lo + 2.5)).unwrap();
        assert_relative_eq!(g1, g2, max_relative = 1e-8);

        let spec = MeijerGSpec::new(
            8,
            1,
            vec![-0.5],
            vec![-0.93, -0.43, 1.49, 1.99, -0.84, -0.34, 0.84, 1.34],
            0.05,
        )
        .unwrap();
        let (lo, hi) = spec.strip();
        let g1 = meijer_g(&spec, &ContourConfig::default().with_offset(lo + 0.1 * (hi - lo))).unwrap();
        let g2 = meijer_g(&spec, &ContourConfig::default().with_offset(lo + 0.8 * (hi - lo))).unwrap();
        assert_relative_eq!(g1, g2, max_relative = 1e-8);
        assert_relative_eq!(g1, meijer_g_residue(&spec).unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn upper_parameter_cases_agree() {
        // G^{8,2}_{2,9} shape used by the closed-form BPSK error rate.
        let spec = MeijerGSpec::new(
            8,
            2,
            vec![1.0 - 1.455, 0.5 - 1.455],
            vec![-0.93, -0.43, 1.49, 1.99, -0.84, -0.34, 0.84, 1.34, -1.455],
            0.067,
        )
        .unwrap();
        let c = meijer_g(&spec, &ContourConfig::default()).unwrap();
        let r = meijer_g_residue(&spec).unwrap();
        assert_relative_eq!(c, r, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_offsets_and_orders() {
        let spec = MeijerGSpec::new(1, 0, vec![], vec![0.0], 1.0).unwrap();
        assert!(meijer_g(&spec, &ContourConfig::default().with_offset(-0.5)).is_err());
        assert!(MeijerGSpec::new(2, 0, vec![], vec![0.0], 1.0).is_err());
        assert!(MeijerGSpec::new(1, 0, vec![], vec![0.0], -1.0).is_err());
        // m + n ≤ (p + q)/2: contour integral diverges.
        let spec = MeijerGSpec::new(1, 0, vec![], vec![0.0, 0.5], 1.0).unwrap();
        assert!(meijer_g(&spec, &ContourConfig::default()).is_err());
    }

    #[test]
    fn collision_distance() {
        assert!(pole_collision_distance(&[0.5, -0.5]) < 1e-15);
        assert_relative_eq!(pole_collision_distance(&[0.1, 0.35, 2.0]), 0.1, max_relative = 1e-12);
    }
}
