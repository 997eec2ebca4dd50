//! Average error rates of subcarrier intensity modulation over the cascaded
//! channel.
//!
//! Every scheme has a direct-integration route ([`error_rate_quadrature`]),
//! a Meijer G route and a truncated power-series route; the last comes with
//! truncation bounds. High-SNR asymptotes and SNR penalties live in
//! [`asymptotic`].
//!
//! SNR arguments are linear (not dB) mean electrical SNR per bit `γ̄`; the
//! instantaneous SNR is `γ̄·i_n²`.

pub mod asymptotic;
mod meijer;
mod quadrature;
mod series;

use std::fmt;
use std::str::FromStr;

use crate::channel::NlosChannel;
use crate::error::{Error, Result};

pub use asymptotic::{asymptotic_error, single_beta_penalty_db, differential_penalty_db, snr_penalty, Asymptote, Penalty};
pub use meijer::{ber_bpsk_meijer, ber_dpsk_ncfsk_meijer, p_half_pi_meijer, p_quarter_pi_meijer, ser_qpsk_meijer};
pub use quadrature::error_rate_quadrature;
pub use series::{ber_bpsk_series, ber_dpsk_ncfsk_series, ser_qpsk_series, truncation_bounds, TruncationBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Dpsk,
    Ncfsk,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Modulation::Bpsk, Modulation::Qpsk, Modulation::Dpsk, Modulation::Ncfsk];

    /// Divisor of the conditional BER exponent for the differential schemes.
    pub fn j(self) -> Option<f64> {
        match self {
            Modulation::Dpsk => Some(1.0),
            Modulation::Ncfsk => Some(2.0),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Dpsk => "dpsk",
            Modulation::Ncfsk => "ncfsk",
        }
    }

    /// Error probability conditioned on the instantaneous SNR `γ`.
    pub fn conditional(self, gamma: f64) -> f64 {
        let x = gamma.sqrt();
        match self {
            Modulation::Bpsk => 0.5 * crate::specfun::erfc(x),
            Modulation::Qpsk => {
                let q = 0.5 * crate::specfun::erfc(x);
                2.0 * q - q * q
            }
            Modulation::Dpsk => 0.5 * (-gamma).exp(),
            Modulation::Ncfsk => 0.5 * (-0.5 * gamma).exp(),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "dpsk" => Ok(Modulation::Dpsk),
            "ncfsk" => Ok(Modulation::Ncfsk),
            other => Err(Error::Config(format!("unknown modulation '{other}'"))),
        }
    }
}

/// Evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Meijer,
    /// Power series keeping terms `k = 0..=J`.
    Series(usize),
    Quadrature,
    /// Monte-Carlo average over this many samples.
    MonteCarlo(usize),
    Asymptotic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Meijer => f.write_str("meijer"),
            Method::Series(j) => write!(f, "series:{j}"),
            Method::Quadrature => f.write_str("quadrature"),
            Method::MonteCarlo(n) => write!(f, "mc:{n}"),
            Method::Asymptotic => f.write_str("asymptotic"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad count in method '{s}'")))
        };
        match s.split_once(':') {
            None => match s.as_str() {
                "meijer" => Ok(Method::Meijer),
                "quadrature" => Ok(Method::Quadrature),
                "asymptotic" => Ok(Method::Asymptotic),
                "series" => Ok(Method::Series(30)),
                _ => Err(Error::Config(format!("unknown method '{s}'"))),
            },
            Some(("series", j)) => Ok(Method::Series(count(j)?)),
            Some(("mc", n)) => {
                let n = count(n)?;
                if n == 0 {
                    return Err(Error::Config("mc needs at least one sample".into()));
                }
                Ok(Method::MonteCarlo(n))
            }
            _ => Err(Error::Config(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateResult {
    pub probability: f64,
    pub method: Method,
    pub terms_used: Option<usize>,
    /// Series only: bound on the truncation error (see [`TruncationBounds`]).
    pub truncation_upper: Option<f64>,
    pub truncation_lower: Option<f64>,
    pub perturbation_applied: bool,
    /// Monte-Carlo only.
    pub std_error: Option<f64>,
    /// Set when an asymptote leaves `[0, 1]`; the value is reported unclamped.
    pub out_of_range: bool,
}

impl ErrorRateResult {
    pub(crate) fn plain(channel: &NlosChannel, probability: f64, method: Method) -> Self {
        ErrorRateResult {
            probability,
            method,
            terms_used: None,
            truncation_upper: None,
            truncation_lower: None,
            perturbation_applied: channel.perturbation.is_some(),
            std_error: None,
            out_of_range: !(0.0..=1.0).contains(&probability),
        }
    }
}

pub(crate) fn check_snr(func: &'static str, snr: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::domain(func, format!("mean SNR must be positive and finite, got {snr}")));
    }
    Ok(())
}

/// Dispatches to the requested route. Monte-Carlo runs use seed 0 and the
/// default stream layout; call [`crate::mcsim`] directly for anything else.
pub fn error_rate(channel: &NlosChannel, snr: f64, modulation: Modulation, method: Method) -> Result<ErrorRateResult> {
    match (method, modulation) {
        (Method::Quadrature, m) => error_rate_quadrature(channel, snr, m),
        (Method::Meijer, Modulation::Bpsk) => ber_bpsk_meijer(channel, snr),
        (Method::Meijer, Modulation::Qpsk) => ser_qpsk_meijer(channel, snr),
        (Method::Meijer, m) => ber_dpsk_ncfsk_meijer(channel, snr, m.j().unwrap()),
        (Method::Series(j), Modulation::Bpsk) => ber_bpsk_series(channel, snr, j),
        (Method::Series(j), Modulation::Qpsk) => ser_qpsk_series(channel, snr, j),
        (Method::Series(terms), m) => ber_dpsk_ncfsk_series(channel, snr, m.j().unwrap(), terms),
        (Method::Asymptotic, m) => asymptotic_error(channel, snr, m).map(|a| a.result),
        (Method::MonteCarlo(n), m) => {
            let cfg = crate::mcsim::SimConfig {
                sample_count: n,
                ..crate::mcsim::SimConfig::default()
            };
            crate::mcsim::empirical_error_rate(channel, snr, m, &cfg, crate::exec::Execution::default())
        }
    }
}

/// `10^{dB/10}`
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
