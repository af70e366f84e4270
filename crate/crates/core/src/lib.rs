//! Optical-turbulence channel derivation and physical-layer secrecy metrics
//! for free-space optical downlinks.
//!
//! The pipeline runs: refractive-index profile → Rytov variance along the
//! slant path → aperture-averaged scintillation index → exponentiated-Weibull
//! fading fit → secrecy outage probability / probability of positive secrecy
//! capacity, evaluated both in closed form (generalized-binomial double
//! series) and by a seeded Monte Carlo oracle. Deterministic attenuation
//! factors (stratospheric Beer–Lambert, visibility-based geometric
//! scattering, Mie extinction) scale the mean SNR.
//!
//! All internal math is in linear units; dB and degrees are converted at the
//! configuration boundary.

pub mod attenuation;
pub mod error;
pub mod ew;
pub mod montecarlo;
pub mod quad;
pub mod scenario;
pub mod secrecy;
pub mod series;
pub mod special;
pub mod turbulence;

pub use error::{Error, Result};

/// Converts a power ratio from dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts degrees to radians.
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}
