use std::f64::consts::PI;

use crate::error::{Error, Result};

// Taylor coefficients of 1/Γ(x) = Σ C[k-1] x^k, so 1/Γ(1+x) = Σ C[k] x^k.
const RGAMMA: [f64; 30] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_24,
    0.166_538_611_382_291_48,
    -0.042_197_734_555_544_33,
    -0.009_621_971_527_876_973,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065_2,
    -0.000_215_241_674_114_950_98,
    0.000_128_050_282_388_116_2,
    -2.013_485_478_078_824e-5,
    -1.250_493_482_142_670_6e-6,
    1.133_027_231_981_696e-6,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_02e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_206e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_6e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
    -1.181_259_301_697_458_8e-16,
    1.186_692_254_751_600_4e-18,
    1.412_380_655_318_031_9e-18,
    -2.298_745_684_435_37e-19,
    1.714_406_321_927_337_4e-20,
];

/// (gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ)) for |μ| ≤ 1/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let m2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in (0..15).rev() {
        even = even * m2 + RGAMMA[2 * k];
        odd = odd * m2 + RGAMMA[2 * k + 1];
    }
    // r(±μ) = even ± μ·odd
    (-odd, even, even + mu * odd, even - mu * odd)
}

const EPS: f64 = 1e-17;
const RESCALE: f64 = 1e250;

/// Returns `(m, s)` with `K_ν(x)·e^x = m·e^s`.
fn bessel_k_scaled_parts(nu: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_k", format!("argument must be positive and finite, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("bessel_k", "order must be finite"));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let (mut kmu, mut k1);
    if x <= 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < 1e-15 { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < 1e-15 { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut i = 1.0;
        loop {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= dd / i;
            p /= i - mu;
            q /= i + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if del.abs() < sum.abs() * EPS || i > 500.0 {
                break;
            }
            i += 1.0;
        }
        kmu = sum * x.exp();
        k1 = sum1 * xi2 * x.exp();
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let a1 = 0.25 - mu2;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2.0;
        loop {
            a -= 2.0 * (i - 1.0);
            c = -a * c / i;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS || i > 100_000.0 {
                break;
            }
            i += 1.0;
        }
        h *= a1;
        kmu = (PI / (2.0 * x)).sqrt() / s;
        k1 = kmu * (mu + x + 0.5 - h) * xi;
    }
    let mut scale = 0.0;
    for i in 1..=(nl as usize) {
        let f = (mu + i as f64) * xi2;
        if k1.abs() > RESCALE / f.max(1.0) {
            let norm = k1.abs();
            kmu /= norm;
            k1 /= norm;
            scale += norm.ln();
        }
        let t = f * k1 + kmu;
        kmu = k1;
        k1 = t;
    }
    Ok((kmu, scale))
}

/// Modified Bessel function of the second kind `K_ν(x)` for real order.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, s) = bessel_k_scaled_parts(nu, x)?;
    Ok(m * (s - x).exp())
}

/// `e^x K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let (m, s) = bessel_k_scaled_parts(nu, x)?;
    Ok(m * s.exp())
}

/// `ln K_ν(x)`, finite wherever the logarithm is representable.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    let (m, s) = bessel_k_scaled_parts(nu, x)?;
    Ok(m.ln() + s - x)
}
