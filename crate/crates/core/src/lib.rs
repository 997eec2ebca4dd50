//! Non-line-of-sight ultraviolet scattering links under cascaded
//! Gamma-Gamma turbulence.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: gamma family, modified Bessel `K_ν`, Beta, the quarter-range
//!   sine integral and a Meijer G evaluator (contour quadrature plus a
//!   double-double residue series).
//! * [`quad`]: adaptive Gauss-Kronrod and Gauss-Legendre rules.
//! * [`channel`]: per-link Gamma-Gamma densities and the cascaded
//!   received-power density by three routes (Bessel-K quadrature, Meijer G,
//!   four-branch power series).
//! * [`geometry`]: single-scattering link geometry and power budget.
//! * [`modem`]: BPSK/QPSK/DPSK/NCFSK error rates, truncation bounds,
//!   high-SNR asymptotes and SNR penalties.
//! * [`mcsim`]: a Monte-Carlo oracle that samples the fading directly.
//! * [`scenario`]: the text configuration format and the batch sweeps that
//!   back the `uvnlos` command-line tool.
//!
//! Data-parallel loops (sweep points, Monte-Carlo lanes) go through [`exec`];
//! with the default `parallel` feature they run on rayon, without it they run
//! sequentially with identical results.

pub mod channel;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod mcsim;
pub mod modem;
pub mod quad;
pub mod scenario;
pub mod specfun;

pub use error::{Error, Result};
pub use channel::{build_channel, GammaGammaParams, NlosChannel};
pub use exec::Execution;
pub use geometry::{Atmosphere, LinkGeometry};
pub use modem::{error_rate, ErrorRateResult, Method, Modulation};
