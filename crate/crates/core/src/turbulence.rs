//! Turbulence statistics for a downlink slant path: altitude profile of the
//! refractive-index structure parameter, Rytov variance by adaptive
//! quadrature, aperture-averaged scintillation index, and the fit from
//! scintillation index to exponentiated-Weibull shape parameters.

use crate::error::{Error, Result};
use crate::ew::{normalize_eta, EwParams, Normalization};
use crate::quad::{integrate_with_splits, QuadControl};
use crate::special::ln_gamma;

/// Slant-path geometry plus the atmospheric inputs the derivation needs.
/// Altitudes in meters, wavelength in meters, zenith angle in radians,
/// wind speed in m/s, ground refractive constant C₀ in m^{−2/3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulencePath {
    pub wavelength: f64,
    pub zenith_angle: f64,
    pub wind_speed: f64,
    pub ground_cn2: f64,
    pub receiver_altitude: f64,
    pub transmitter_altitude: f64,
    pub aperture_diameter: f64,
}

/// Everything `analyze` derives from a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceResult {
    pub rytov_variance: f64,
    pub scintillation_index: f64,
    pub path_length: f64,
    pub aperture_parameter: f64,
}

/// The flat-earth secant geometry loses validity near the horizon.
pub const MAX_ZENITH_RAD: f64 = 89.0 * std::f64::consts::PI / 180.0;

/// Beyond this altitude the profile is below 1e-30 m^{−2/3}; integrating
/// further only spends quadrature nodes on a numerically zero tail.
pub const PROFILE_CEILING_M: f64 = 100_000.0;

impl TurbulencePath {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            problems.push(format!("wavelength must be positive, got {}", self.wavelength));
        }
        if !(self.zenith_angle >= 0.0 && self.zenith_angle < MAX_ZENITH_RAD) {
            problems.push(format!(
                "zenith angle must lie in [0, 89°), got {} rad",
                self.zenith_angle
            ));
        }
        if !(self.wind_speed >= 0.0 && self.wind_speed.is_finite()) {
            problems.push(format!("wind speed must be ≥ 0, got {}", self.wind_speed));
        }
        if !(self.ground_cn2 >= 0.0 && self.ground_cn2.is_finite()) {
            problems.push(format!("ground Cn² must be ≥ 0, got {}", self.ground_cn2));
        }
        if !(self.receiver_altitude >= 0.0 && self.receiver_altitude.is_finite()) {
            problems.push(format!(
                "receiver altitude must be ≥ 0, got {}",
                self.receiver_altitude
            ));
        }
        if !(self.transmitter_altitude > self.receiver_altitude)
            || !self.transmitter_altitude.is_finite()
        {
            problems.push(format!(
                "transmitter altitude ({}) must exceed receiver altitude ({})",
                self.transmitter_altitude, self.receiver_altitude
            ));
        }
        if !(self.aperture_diameter >= 0.0 && self.aperture_diameter.is_finite()) {
            problems.push(format!(
                "aperture diameter must be ≥ 0, got {}",
                self.aperture_diameter
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Geometry(problems.join("; ")))
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Slant length between the endpoints, flat-earth secant geometry.
    pub fn path_length(&self) -> f64 {
        (self.transmitter_altitude - self.receiver_altitude) / self.zenith_angle.cos()
    }
}

/// Hufnagel–Valley altitude profile of the refractive-index structure
/// parameter, h in meters.
pub fn cn2_profile(h: f64, wind_speed: f64, ground_cn2: f64) -> f64 {
    let w_term = wind_speed / 27.0;
    0.00594 * w_term * w_term * (1e-5 * h).powi(10) * (-h / 1000.0).exp()
        + 2.7e-16 * (-h / 1500.0).exp()
        + ground_cn2 * (-h / 100.0).exp()
}

pub fn rytov_variance(path: &TurbulencePath) -> Result<f64> {
    let wind = path.wind_speed;
    let c0 = path.ground_cn2;
    rytov_variance_with_profile(path, move |h| cn2_profile(h, wind, c0))
}

/// Rytov variance with an arbitrary altitude profile in place of
/// the built-in one. 2.25 k^{7/6} sec^{11/6}(ξ) ∫ C_n²(h)(h−h⁰)^{5/6} dh,
/// integrated from the receiver altitude up to the profile ceiling.
pub fn rytov_variance_with_profile(
    path: &TurbulencePath,
    profile: impl Fn(f64) -> f64,
) -> Result<f64> {
    path.validate()?;
    let h0 = path.receiver_altitude;
    let top = path.transmitter_altitude.min(PROFILE_CEILING_M);
    if top <= h0 {
        return Ok(0.0);
    }

    let integrand = move |h: f64| profile(h) * (h - h0).max(0.0).powf(5.0 / 6.0);
    let splits = profile_splits(h0, top);
    let ctl = QuadControl::with_rel_tolerance(1e-8);
    let integral = integrate_with_splits(integrand, &splits, &ctl, "rytov variance")?;

    let k = path.wavenumber();
    let sec = 1.0 / path.zenith_angle.cos();
    Ok(2.25 * k.powf(7.0 / 6.0) * sec.powf(11.0 / 6.0) * integral.value)
}

/// Panel boundaries tracking the profile's decay scales (100 m, 1 km,
/// 1.5 km) and the mid-altitude bump of the wind term.
fn profile_splits(h0: f64, top: f64) -> Vec<f64> {
    let mut pts = vec![h0, top];
    for off in [1.0, 10.0, 100.0, 500.0, 1000.0] {
        pts.push(h0 + off);
    }
    for abs in [
        2_000.0, 5_000.0, 8_000.0, 10_000.0, 12_500.0, 15_000.0, 20_000.0, 30_000.0, 50_000.0,
    ] {
        pts.push(abs);
    }
    pts.retain(|&p| p >= h0 && p <= top);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// d = √(k D_G² / (4 L)): receiver aperture against the Fresnel scale.
pub fn aperture_parameter(path: &TurbulencePath) -> Result<f64> {
    path.validate()?;
    let l = path.path_length();
    Ok((path.wavenumber() * path.aperture_diameter * path.aperture_diameter / (4.0 * l)).sqrt())
}

/// Aperture-averaged scintillation index from the Rytov variance, plane-wave
/// downlink model.
pub fn scintillation_index(rytov: f64, d: f64) -> f64 {
    if rytov == 0.0 {
        return 0.0;
    }
    let d2 = d * d;
    let s65 = rytov.powf(6.0 / 5.0);
    let first = 0.49 * rytov / (1.0 + 0.65 * d2 + 1.11 * s65).powf(7.0 / 6.0);
    let second = 0.51 * rytov * (1.0 + 0.69 * s65).powf(-5.0 / 6.0)
        / (1.0 + 0.90 * d2 + 0.62 * d2 * s65);
    (first + second).exp_m1()
}

/// Empirical coefficients of the scintillation-index → EW shape fit, kept
/// in one block so they can be audited or replaced as a unit; the fixture
/// generator script mirrors these values.
pub mod fit_coefficients {
    pub const ALPHA_SCALE: f64 = 7.220;
    pub const ALPHA_GAMMA_SLOPE: f64 = 2.487;
    pub const ALPHA_GAMMA_OFFSET: f64 = -0.104;
    pub const BETA_SCALE: f64 = 1.012;
    pub const BETA_EXPONENT: f64 = -13.0 / 25.0;
    pub const BETA_OFFSET: f64 = 0.142;
}

/// Fit EW shape parameters to a scintillation index, then solve for the
/// scale under the requested normalization.
pub fn fit_ew_params(sigma_i2: f64, normalization: Normalization) -> Result<EwParams> {
    use fit_coefficients::*;
    if !(sigma_i2 > 0.0 && sigma_i2.is_finite()) {
        return Err(Error::domain(
            "fit_ew_params",
            format!("scintillation index must be positive and finite, got {sigma_i2}"),
        ));
    }
    let gamma_arg = ALPHA_GAMMA_SLOPE * sigma_i2.powf(1.0 / 6.0) + ALPHA_GAMMA_OFFSET;
    if gamma_arg <= 0.0 {
        return Err(Error::domain(
            "fit_ew_params",
            format!(
                "scintillation index {sigma_i2} too small: gamma argument {gamma_arg} ≤ 0"
            ),
        ));
    }
    let alpha = ALPHA_SCALE * sigma_i2.powf(1.0 / 3.0) / ln_gamma(gamma_arg).exp();
    let beta = BETA_SCALE * (alpha * sigma_i2).powf(BETA_EXPONENT) + BETA_OFFSET;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::domain(
            "fit_ew_params",
            format!("fit produced nonpositive shape: alpha={alpha}, beta={beta}"),
        ));
    }
    normalize_eta(alpha, beta, normalization)
}

/// Full chain: Rytov variance, aperture parameter, scintillation index.
pub fn analyze(path: &TurbulencePath) -> Result<TurbulenceResult> {
    let rytov = rytov_variance(path)?;
    let d = aperture_parameter(path)?;
    Ok(TurbulenceResult {
        rytov_variance: rytov,
        scintillation_index: scintillation_index(rytov, d),
        path_length: path.path_length(),
        aperture_parameter: d,
    })
}
