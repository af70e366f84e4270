//! Deterministic transmittance factors for an optical downlink and their
//! composition: Beer–Lambert stratospheric loss, visibility-driven
//! geometrical scattering through a cloud layer, and Mie scattering near the
//! ground. Every factor lives in (0, 1]; the composite multiplies the mean
//! SNR as f².

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratosphericLoss {
    /// Extinction coefficient in km⁻¹.
    pub coefficient: f64,
    pub path_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricLoss {
    pub visibility_km: f64,
    pub wavelength_nm: f64,
    pub path_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieLoss {
    pub extinction_ratio: f64,
    /// ξ in radians; the elevation used by the model is Θ = π/2 − ξ.
    pub zenith_angle: f64,
}

/// The attenuation mechanisms present on one link. Absent mechanisms
/// contribute a factor of 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttenuationStack {
    pub stratospheric: Option<StratosphericLoss>,
    pub geometric: Option<GeometricLoss>,
    pub mie: Option<MieLoss>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudMicrophysics {
    /// g/m³
    pub liquid_water_content: f64,
    /// cm⁻³
    pub droplet_concentration: f64,
    pub layer_thickness_km: f64,
    pub label: String,
}

impl CloudMicrophysics {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("liquid_water_content", self.liquid_water_content),
            ("droplet_concentration", self.droplet_concentration),
            ("layer_thickness_km", self.layer_thickness_km),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "CloudMicrophysics",
                    format!("{name} must be strictly positive, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Visibility model coefficients, grouped so they can be audited or replaced
/// as a unit; the fixture generator script mirrors these values.
pub mod visibility_coefficients {
    pub const SCALE_KM: f64 = 1.002;
    pub const EXPONENT: f64 = 0.6473;
}

pub fn stratospheric_transmittance(sigma_s: f64, path_km: f64) -> Result<f64> {
    for (name, v) in [("sigma_s", sigma_s), ("path_km", path_km)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain(
                "stratospheric_transmittance",
                format!("{name} must be ≥ 0, got {v}"),
            ));
        }
    }
    Ok((-sigma_s * path_km).exp())
}

/// Piecewise visibility exponent ϱ. Discontinuous at V = 50 km by
/// construction; not smoothed.
pub fn kim_exponent(visibility_km: f64) -> Result<f64> {
    if !(visibility_km > 0.0 && visibility_km.is_finite()) {
        return Err(Error::domain(
            "kim_exponent",
            format!("visibility must be positive, got {visibility_km}"),
        ));
    }
    let v = visibility_km;
    Ok(if v > 50.0 {
        1.6
    } else if v > 6.0 {
        1.3
    } else if v > 1.0 {
        0.16 * v + 0.34
    } else if v > 0.5 {
        v - 0.5
    } else {
        0.0
    })
}

/// exp(−σ^G L) with σ^G = (3.91/V)(λ/550 nm)^{−ϱ} in km⁻¹.
pub fn geometric_transmittance(
    visibility_km: f64,
    wavelength_nm: f64,
    path_km: f64,
) -> Result<f64> {
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(Error::domain(
            "geometric_transmittance",
            format!("wavelength must be positive, got {wavelength_nm} nm"),
        ));
    }
    if !(path_km > 0.0 && path_km.is_finite()) {
        return Err(Error::domain(
            "geometric_transmittance",
            format!("path must be positive, got {path_km} km"),
        ));
    }
    let rho = kim_exponent(visibility_km)?;
    let sigma_g = (3.91 / visibility_km) * (wavelength_nm / 550.0).powf(-rho);
    Ok((-sigma_g * path_km).exp())
}

/// Visibility inside a cloud from its microphysics, in km.
pub fn visibility_from_cloud(cloud: &CloudMicrophysics) -> Result<f64> {
    use visibility_coefficients::*;
    cloud.validate()?;
    let product = cloud.liquid_water_content * cloud.droplet_concentration;
    Ok(SCALE_KM / product.powf(EXPONENT))
}

/// exp(−τ / sin Θ) with Θ = π/2 − ξ the receiver elevation.
pub fn mie_transmittance(tau: f64, zenith_angle: f64) -> Result<f64> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(
            "mie_transmittance",
            format!("extinction ratio must be ≥ 0, got {tau}"),
        ));
    }
    let theta = std::f64::consts::FRAC_PI_2 - zenith_angle;
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(
            "mie_transmittance",
            format!(
                "elevation Θ must lie in (0, π/2], got {theta} rad (zenith {zenith_angle} rad)"
            ),
        ));
    }
    Ok((-tau / theta.sin()).exp())
}

/// Slant length between two altitudes in km, flat-earth secant geometry.
pub fn slant_length_km(h_low_m: f64, h_high_m: f64, zenith_angle: f64) -> Result<f64> {
    if !(h_high_m > h_low_m) || !h_low_m.is_finite() {
        return Err(Error::Geometry(format!(
            "upper altitude {h_high_m} must exceed lower altitude {h_low_m}"
        )));
    }
    if !(zenith_angle >= 0.0 && zenith_angle < crate::turbulence::MAX_ZENITH_RAD) {
        return Err(Error::Geometry(format!(
            "zenith angle must lie in [0, 89°), got {zenith_angle} rad"
        )));
    }
    Ok((h_high_m - h_low_m) / zenith_angle.cos() / 1000.0)
}

/// Product of the present factors; empty stack passes everything through.
pub fn composite_transmittance(stack: &AttenuationStack) -> Result<f64> {
    let mut f = 1.0;
    if let Some(s) = stack.stratospheric {
        f *= stratospheric_transmittance(s.coefficient, s.path_km)?;
    }
    if let Some(g) = stack.geometric {
        f *= geometric_transmittance(g.visibility_km, g.wavelength_nm, g.path_km)?;
    }
    if let Some(m) = stack.mie {
        f *= mie_transmittance(m.extinction_ratio, m.zenith_angle)?;
    }
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::domain(
            "composite_transmittance",
            format!("composite factor {f} fell outside (0, 1]"),
        ));
    }
    Ok(f)
}

/// The mean-SNR multiplier a transmittance f implies: γ̄_eff = γ̄ · f².
pub fn snr_penalty(stack: &AttenuationStack) -> Result<f64> {
    let f = composite_transmittance(stack)?;
    Ok(f * f)
}
