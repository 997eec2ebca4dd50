use super::gamma::ln_gamma;
use crate::error::{Error, Result};

/// Euler beta function `B(a, b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain("beta_fn", format!("arguments must be positive, got ({a}, {b})")));
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// `∫₀^{π/4} sin^x θ dθ`.
///
/// With `u = sin θ` the integrand expands in `(1 − u²)^{−1/2}`; each term
/// integrates in closed form and the series converges geometrically (ratio 1/2).
pub fn g_quarter(x: f64) -> Result<f64> {
    if !(x > -1.0) || !x.is_finite() {
        return Err(Error::domain("g_quarter", format!("integral diverges for x = {x}")));
    }
    let xp1 = x + 1.0;
    let mut coef = 1.0; // (1/2)_n / n! / 2^n
    let mut sum = 0.0;
    for n in 0..200 {
        let term = coef / (xp1 + 2.0 * n as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        coef *= (n as f64 + 0.5) / (n as f64 + 1.0) * 0.5;
    }
    Ok(2f64.powf(-0.5 * xp1) * sum)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
