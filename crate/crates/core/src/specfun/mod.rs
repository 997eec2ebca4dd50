//! Special functions: gamma family, modified Bessel `K_ν`, beta-type
//! integrals and the Meijer G-function.

pub mod bessel;
pub mod beta;
pub mod dd;
pub mod gamma;
pub mod meijer;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use beta::{beta_fn, erfc, g_quarter};
pub use gamma::{gamma, ln_gamma, ln_gamma_complex, ln_gamma_signed, sin_pi};
pub use meijer::{
    meijer_g, meijer_g_residue, meijer_g_scaled, pole_collision_distance, ContourConfig, MeijerGSpec, ScaledValue,
};
