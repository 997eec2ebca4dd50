use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln(2π)/2
pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(πx)` with exact argument reduction, so integers give exact zeros.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    // r in [-1, 1]
    let (r, sign) = if r > 0.5 {
        (1.0 - r, 1.0)
    } else if r < -0.5 {
        (-1.0 - r, 1.0)
    } else {
        (r, 1.0)
    };
    sign * (PI * r).sin()
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    // x >= 0.5
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::domain("ln_gamma", "NaN argument"));
    }
    if is_pole(x) {
        return Err(Error::domain("ln_gamma", format!("pole at x = {x}")));
    }
    if x >= 0.5 {
        return Ok((lanczos_ln_gamma(x), 1.0));
    }
    let s = sin_pi(x);
    let ln = PI.ln() - s.abs().ln() - lanczos_ln_gamma(1.0 - x);
    Ok((ln, s.signum()))
}

/// `ln|Γ(x)|` for real `x`; this is the principal log-gamma wherever `Γ(x) > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_signed(x).map(|(l, _)| l)
}

pub fn gamma(x: f64) -> Result<f64> {
    let (l, s) = ln_gamma_signed(x)?;
    Ok(s * l.exp())
}

/// `ln sin(πz)` evaluated without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let ipz = i * PI * z;
    if z.im >= 0.0 {
        // sin(πz) = e^{-iπz} (e^{2iπz} - 1) / (2i)
        -ipz + ((2.0 * ipz).exp() - 1.0).ln() - (2.0 * i).ln()
    } else {
        // sin(πz) = e^{iπz} (1 - e^{-2iπz}) / (2i)
        ipz + (1.0 - (-2.0 * ipz).exp()).ln() - (2.0 * i).ln()
    }
}

fn lanczos_ln_gamma_complex(x: Complex64) -> Complex64 {
    let z = x - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// Log-gamma for complex arguments. The imaginary part is correct modulo 2π,
/// which is all that `exp` of it ever needs.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_pole(z.re) {
        return Err(Error::domain("ln_gamma", format!("pole at z = {}", z.re)));
    }
    if z.re >= 0.5 {
        Ok(lanczos_ln_gamma_complex(z))
    } else {
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos_ln_gamma_complex(1.0 - z))
    }
}
