//! Named link scenarios and sweep grids: a flat, unit-suffixed document
//! format describing one downlink, validation that collects every problem at
//! once, channel derivation (turbulence chain + attenuation stack + SNR
//! assembly), and the sweep runner that produces one row per grid value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attenuation::{
    composite_transmittance, slant_length_km, AttenuationStack, CloudMicrophysics, GeometricLoss,
    MieLoss, StratosphericLoss,
};
use crate::error::{Error, Result};
use crate::ew::{EwParams, Normalization, SnrChannel};
use crate::montecarlo::{estimate_ppsc, estimate_sop, McConfig, McEstimate};
use crate::secrecy::{
    ppsc_closed_form_with, sop_closed_form_diag, SecrecyQuery, SopFormula, ThresholdConvention,
};
use crate::series::SeriesControl;
use crate::turbulence::{analyze, fit_ew_params, TurbulencePath, TurbulenceResult};
use crate::{db_to_linear, deg_to_rad, linear_to_db};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;
pub const SWEEP_SCHEMA_VERSION: u32 = 1;

/// Attenuation mechanisms are scenario inputs only inside their validity
/// envelope: Beer–Lambert stratospheric loss above this altitude,
/// cloud/Mie scattering below [`LOW_ALTITUDE_CEILING_M`].
pub const STRATOSPHERE_FLOOR_M: f64 = 10_000.0;
pub const LOW_ALTITUDE_CEILING_M: f64 = 5_000.0;

fn default_secrecy_rate() -> f64 {
    0.01
}

fn default_cloud_label() -> String {
    "cloud".to_string()
}

/// One downlink, flat keys with units in the names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkScenario {
    pub schema_version: u32,
    pub name: String,
    pub transmitter_altitude_m: f64,
    pub receiver_altitude_m: f64,
    pub zenith_angle_deg: f64,
    pub wind_speed_mps: f64,
    pub ground_cn2: f64,
    pub wavelength_nm: f64,
    #[serde(default)]
    pub aperture_diameter_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eavesdropper_aperture_diameter_m: Option<f64>,
    pub baseline_mean_snr_d_db: f64,
    pub baseline_mean_snr_e_db: f64,
    #[serde(default = "default_secrecy_rate")]
    pub secrecy_rate: f64,
    #[serde(default)]
    pub stratospheric_attenuation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratospheric_coefficient_per_km: Option<f64>,
    #[serde(default)]
    pub cloud_attenuation: bool,
    #[serde(default = "default_cloud_label")]
    pub cloud_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_liquid_water_content_g_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_droplet_concentration_per_cm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_layer_thickness_km: Option<f64>,
    #[serde(default)]
    pub mie_attenuation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mie_extinction_ratio: Option<f64>,
    /// Permit attenuation mechanisms outside their altitude envelope.
    #[serde(default)]
    pub allow_attenuation_out_of_envelope: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Destination,
    Eavesdropper,
}

impl LinkScenario {
    /// Collects every problem instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            errs.push(format!(
                "schema_version: expected {SCENARIO_SCHEMA_VERSION}, got {}",
                self.schema_version
            ));
        }
        if self.name.trim().is_empty() {
            errs.push("name: must not be empty".to_string());
        }
        if !(self.receiver_altitude_m >= 0.0 && self.receiver_altitude_m.is_finite()) {
            errs.push(format!(
                "receiver_altitude_m: must be ≥ 0, got {}",
                self.receiver_altitude_m
            ));
        }
        if !(self.transmitter_altitude_m > self.receiver_altitude_m)
            || !self.transmitter_altitude_m.is_finite()
        {
            errs.push(format!(
                "transmitter_altitude_m: must exceed receiver_altitude_m ({} vs {})",
                self.transmitter_altitude_m, self.receiver_altitude_m
            ));
        }
        if !(self.zenith_angle_deg >= 0.0 && self.zenith_angle_deg < 89.0) {
            errs.push(format!(
                "zenith_angle_deg: must lie in [0, 89), got {}",
                self.zenith_angle_deg
            ));
        }
        if !(self.wind_speed_mps >= 0.0 && self.wind_speed_mps.is_finite()) {
            errs.push(format!("wind_speed_mps: must be ≥ 0, got {}", self.wind_speed_mps));
        }
        if !(self.ground_cn2 >= 0.0 && self.ground_cn2.is_finite()) {
            errs.push(format!("ground_cn2: must be ≥ 0, got {}", self.ground_cn2));
        }
        if !(self.wavelength_nm > 0.0 && self.wavelength_nm.is_finite()) {
            errs.push(format!("wavelength_nm: must be positive, got {}", self.wavelength_nm));
        }
        if !(self.aperture_diameter_m >= 0.0 && self.aperture_diameter_m.is_finite()) {
            errs.push(format!(
                "aperture_diameter_m: must be ≥ 0, got {}",
                self.aperture_diameter_m
            ));
        }
        if let Some(a) = self.eavesdropper_aperture_diameter_m {
            if !(a >= 0.0 && a.is_finite()) {
                errs.push(format!(
                    "eavesdropper_aperture_diameter_m: must be ≥ 0, got {a}"
                ));
            }
        }
        for (key, v) in [
            ("baseline_mean_snr_d_db", self.baseline_mean_snr_d_db),
            ("baseline_mean_snr_e_db", self.baseline_mean_snr_e_db),
        ] {
            if !v.is_finite() {
                errs.push(format!("{key}: must be finite, got {v}"));
            }
        }
        if !(self.secrecy_rate >= 0.0 && self.secrecy_rate.is_finite()) {
            errs.push(format!("secrecy_rate: must be ≥ 0, got {}", self.secrecy_rate));
        }

        if self.stratospheric_attenuation {
            match self.stratospheric_coefficient_per_km {
                None => errs.push(
                    "stratospheric_coefficient_per_km: required when stratospheric_attenuation = true"
                        .to_string(),
                ),
                Some(c) if !(c >= 0.0 && c.is_finite()) => {
                    errs.push(format!("stratospheric_coefficient_per_km: must be ≥ 0, got {c}"))
                }
                _ => {}
            }
            if !self.allow_attenuation_out_of_envelope
                && self.receiver_altitude_m <= STRATOSPHERE_FLOOR_M
            {
                errs.push(format!(
                    "stratospheric_attenuation: applies only when both endpoints sit above {} m \
                     (receiver at {} m); set allow_attenuation_out_of_envelope = true to force",
                    STRATOSPHERE_FLOOR_M, self.receiver_altitude_m
                ));
            }
        }
        if self.cloud_attenuation {
            for (key, v) in [
                (
                    "cloud_liquid_water_content_g_m3",
                    self.cloud_liquid_water_content_g_m3,
                ),
                (
                    "cloud_droplet_concentration_per_cm3",
                    self.cloud_droplet_concentration_per_cm3,
                ),
            ] {
                match v {
                    None => errs.push(format!("{key}: required when cloud_attenuation = true")),
                    Some(x) if !(x > 0.0 && x.is_finite()) => {
                        errs.push(format!("{key}: must be strictly positive, got {x}"))
                    }
                    _ => {}
                }
            }
            if let Some(t) = self.cloud_layer_thickness_km {
                if !(t > 0.0 && t.is_finite()) {
                    errs.push(format!(
                        "cloud_layer_thickness_km: must be strictly positive, got {t}"
                    ));
                }
            }
        }
        if self.mie_attenuation {
            match self.mie_extinction_ratio {
                None => errs.push(
                    "mie_extinction_ratio: required when mie_attenuation = true".to_string(),
                ),
                Some(t) if !(t >= 0.0 && t.is_finite()) => {
                    errs.push(format!("mie_extinction_ratio: must be ≥ 0, got {t}"))
                }
                _ => {}
            }
        }
        if (self.cloud_attenuation || self.mie_attenuation)
            && !self.allow_attenuation_out_of_envelope
            && self.receiver_altitude_m >= LOW_ALTITUDE_CEILING_M
        {
            errs.push(format!(
                "cloud/mie attenuation: applies only to receivers below {} m \
                 (receiver at {} m); set allow_attenuation_out_of_envelope = true to force",
                LOW_ALTITUDE_CEILING_M, self.receiver_altitude_m
            ));
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ScenarioValidation(errs))
        }
    }

    pub fn zenith_angle_rad(&self) -> f64 {
        deg_to_rad(self.zenith_angle_deg)
    }

    pub fn turbulence_path(&self, receiver: Receiver) -> TurbulencePath {
        let aperture = match receiver {
            Receiver::Destination => self.aperture_diameter_m,
            Receiver::Eavesdropper => self
                .eavesdropper_aperture_diameter_m
                .unwrap_or(self.aperture_diameter_m),
        };
        TurbulencePath {
            wavelength: self.wavelength_nm * 1e-9,
            zenith_angle: self.zenith_angle_rad(),
            wind_speed: self.wind_speed_mps,
            ground_cn2: self.ground_cn2,
            receiver_altitude: self.receiver_altitude_m,
            transmitter_altitude: self.transmitter_altitude_m,
            aperture_diameter: aperture,
        }
    }

    pub fn attenuation_stack(&self) -> Result<AttenuationStack> {
        let zenith = self.zenith_angle_rad();
        let stratospheric = if self.stratospheric_attenuation {
            Some(StratosphericLoss {
                coefficient: self.stratospheric_coefficient_per_km.ok_or_else(|| {
                    Error::domain("attenuation_stack", "missing stratospheric coefficient")
                })?,
                path_km: slant_length_km(
                    self.receiver_altitude_m,
                    self.transmitter_altitude_m,
                    zenith,
                )?,
            })
        } else {
            None
        };
        let geometric = if self.cloud_attenuation {
            let cloud = CloudMicrophysics {
                liquid_water_content: self.cloud_liquid_water_content_g_m3.ok_or_else(|| {
                    Error::domain("attenuation_stack", "missing cloud liquid water content")
                })?,
                droplet_concentration: self.cloud_droplet_concentration_per_cm3.ok_or_else(
                    || Error::domain("attenuation_stack", "missing cloud droplet concentration"),
                )?,
                layer_thickness_km: self.cloud_layer_thickness_km.unwrap_or(1.0),
                label: self.cloud_label.clone(),
            };
            let visibility = crate::attenuation::visibility_from_cloud(&cloud)?;
            // Beer-Lambert length is the slant traversal of the layer itself
            let path_km = cloud.layer_thickness_km / zenith.cos();
            Some(GeometricLoss {
                visibility_km: visibility,
                wavelength_nm: self.wavelength_nm,
                path_km,
            })
        } else {
            None
        };
        let mie = if self.mie_attenuation {
            Some(MieLoss {
                extinction_ratio: self.mie_extinction_ratio.ok_or_else(|| {
                    Error::domain("attenuation_stack", "missing Mie extinction ratio")
                })?,
                zenith_angle: zenith,
            })
        } else {
            None
        };
        Ok(AttenuationStack {
            stratospheric,
            geometric,
            mie,
        })
    }
}

/// Everything channel assembly derives from a scenario, destination aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDerivation {
    pub turbulence: TurbulenceResult,
    pub ew: EwParams,
    pub transmittance: f64,
    /// Effective linear mean SNRs: baseline · transmittance².
    pub mean_snr_d: f64,
    pub mean_snr_e: f64,
}

fn scenario_context(name: &str, e: Error) -> Error {
    match e {
        Error::Domain { context, message } => Error::Domain {
            context,
            message: format!("[scenario {name}] {message}"),
        },
        other => other,
    }
}

/// Turbulence chain + fit + attenuation for the destination; the
/// eavesdropper shares fading parameters and transmittance.
pub fn derive_link(s: &LinkScenario) -> Result<LinkDerivation> {
    s.validate()?;
    let path = s.turbulence_path(Receiver::Destination);
    let turbulence = analyze(&path).map_err(|e| scenario_context(&s.name, e))?;
    let ew = fit_ew_params(turbulence.scintillation_index, Normalization::UnitSecondMoment)
        .map_err(|e| scenario_context(&s.name, e))?;
    let transmittance = composite_transmittance(&s.attenuation_stack()?)?;
    let penalty = transmittance * transmittance;
    Ok(LinkDerivation {
        turbulence,
        ew,
        transmittance,
        mean_snr_d: db_to_linear(s.baseline_mean_snr_d_db) * penalty,
        mean_snr_e: db_to_linear(s.baseline_mean_snr_e_db) * penalty,
    })
}

/// SNR channel for one receiver, honoring a per-receiver aperture.
pub fn build_channel(s: &LinkScenario, receiver: Receiver) -> Result<SnrChannel> {
    s.validate()?;
    let path = s.turbulence_path(receiver);
    let turbulence = analyze(&path).map_err(|e| scenario_context(&s.name, e))?;
    let ew = fit_ew_params(turbulence.scintillation_index, Normalization::UnitSecondMoment)
        .map_err(|e| scenario_context(&s.name, e))?;
    let transmittance = composite_transmittance(&s.attenuation_stack()?)?;
    let baseline_db = match receiver {
        Receiver::Destination => s.baseline_mean_snr_d_db,
        Receiver::Eavesdropper => s.baseline_mean_snr_e_db,
    };
    SnrChannel::new(ew, db_to_linear(baseline_db) * transmittance * transmittance)
}

/// Ready-to-evaluate query. The closed forms assume both receivers share
/// (α, β, η), so a differing eavesdropper aperture is rejected here.
pub fn derive_query(
    s: &LinkScenario,
    convention: ThresholdConvention,
) -> Result<(SecrecyQuery, LinkDerivation)> {
    if let Some(e_ap) = s.eavesdropper_aperture_diameter_m {
        if e_ap != s.aperture_diameter_m {
            return Err(Error::ScenarioValidation(vec![format!(
                "eavesdropper_aperture_diameter_m: secrecy metrics assume both receivers share \
                 fading parameters; aperture {} differs from destination {}",
                e_ap, s.aperture_diameter_m
            )]));
        }
    }
    let derivation = derive_link(s)?;
    let query = SecrecyQuery::new(
        derivation.ew,
        derivation.mean_snr_d,
        derivation.mean_snr_e,
        s.secrecy_rate,
        convention,
    )?;
    Ok((query, derivation))
}

/// Scenario fields that may vary along a sweep grid. Serialized names match
/// the scenario keys exactly, and `key()` returns the same string, so sweep
/// documents and output columns share the scenario vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    BaselineMeanSnrDDb,
    BaselineMeanSnrEDb,
    ZenithAngleDeg,
    ApertureDiameterM,
    WindSpeedMps,
    TransmitterAltitudeM,
}

impl SweepVariable {
    /// Whether a change to this variable invalidates the derived channel
    /// (turbulence chain or attenuation stack).
    pub fn affects_derivation(self) -> bool {
        !matches!(
            self,
            SweepVariable::BaselineMeanSnrDDb | SweepVariable::BaselineMeanSnrEDb
        )
    }

    pub fn key(self) -> &'static str {
        match self {
            SweepVariable::BaselineMeanSnrDDb => "baseline_mean_snr_d_db",
            SweepVariable::BaselineMeanSnrEDb => "baseline_mean_snr_e_db",
            SweepVariable::ZenithAngleDeg => "zenith_angle_deg",
            SweepVariable::ApertureDiameterM => "aperture_diameter_m",
            SweepVariable::WindSpeedMps => "wind_speed_mps",
            SweepVariable::TransmitterAltitudeM => "transmitter_altitude_m",
        }
    }

    fn apply(self, s: &mut LinkScenario, value: f64) {
        match self {
            SweepVariable::BaselineMeanSnrDDb => s.baseline_mean_snr_d_db = value,
            SweepVariable::BaselineMeanSnrEDb => s.baseline_mean_snr_e_db = value,
            SweepVariable::ZenithAngleDeg => s.zenith_angle_deg = value,
            SweepVariable::ApertureDiameterM => s.aperture_diameter_m = value,
            SweepVariable::WindSpeedMps => s.wind_speed_mps = value,
            SweepVariable::TransmitterAltitudeM => s.transmitter_altitude_m = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sop,
    Ppsc,
}

/// Series budget roomy enough for the slowest-converging corner of the
/// shipped sweeps (largest γ̄_D/γ̄_E gap).
pub fn sweep_series_control() -> SeriesControl {
    SeriesControl {
        rel_tolerance: 1e-12,
        max_terms: 2000,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: LinkScenario,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub secrecy_rate: f64,
    pub convention: ThresholdConvention,
    pub formula: SopFormula,
    pub series: SeriesControl,
    pub mc: Option<McConfig>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.grid.is_empty() {
            errs.push("grid: must not be empty".to_string());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            errs.push("grid: all values must be finite".to_string());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            errs.push("grid: values must be strictly increasing".to_string());
        }
        if self.metrics.is_empty() {
            errs.push("metrics: need at least one of sop, ppsc".to_string());
        }
        if !(self.secrecy_rate >= 0.0 && self.secrecy_rate.is_finite()) {
            errs.push(format!("secrecy_rate: must be ≥ 0, got {}", self.secrecy_rate));
        }
        if let Err(e) = self.scenario.validate() {
            match e {
                Error::ScenarioValidation(inner) => {
                    errs.extend(inner.into_iter().map(|m| format!("scenario.{m}")))
                }
                other => errs.push(other.to_string()),
            }
        }
        if let Some(mc) = &self.mc {
            if let Err(e) = mc.validate() {
                errs.push(e.to_string());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ScenarioValidation(errs))
        }
    }
}

/// One evaluated grid point. Derived fields are NaN when `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid_value: f64,
    pub rytov_variance: f64,
    pub scintillation_index: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub transmittance: f64,
    pub effective_mean_snr_d_db: f64,
    pub effective_mean_snr_e_db: f64,
    pub sop: Option<f64>,
    pub sop_raw: Option<f64>,
    pub sop_outer_terms: Option<usize>,
    pub ppsc: Option<f64>,
    pub mc_sop: Option<McEstimate>,
    pub mc_ppsc: Option<McEstimate>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(grid_value: f64, message: String) -> SweepRow {
        SweepRow {
            grid_value,
            rytov_variance: f64::NAN,
            scintillation_index: f64::NAN,
            alpha: f64::NAN,
            beta: f64::NAN,
            eta: f64::NAN,
            transmittance: f64::NAN,
            effective_mean_snr_d_db: f64::NAN,
            effective_mean_snr_e_db: f64::NAN,
            sop: None,
            sop_raw: None,
            sop_outer_terms: None,
            ppsc: None,
            mc_sop: None,
            mc_ppsc: None,
            error: Some(message),
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_with_cache(spec, true)
}

/// `use_cache = false` re-derives the channel at every grid point even when
/// the swept variable cannot change it; results must be bit-identical.
#[doc(hidden)]
pub fn run_sweep_with_cache(spec: &SweepSpec, use_cache: bool) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cached = if use_cache && !spec.variable.affects_derivation() {
        Some(derive_link(&spec.scenario)?)
    } else {
        None
    };
    use rayon::prelude::*;
    let rows = spec
        .grid
        .par_iter()
        .map(|&value| evaluate_row(spec, value, cached.as_ref()))
        .collect();
    Ok(rows)
}

fn evaluate_row(spec: &SweepSpec, value: f64, cached: Option<&LinkDerivation>) -> SweepRow {
    let mut scenario = spec.scenario.clone();
    spec.variable.apply(&mut scenario, value);
    scenario.secrecy_rate = spec.secrecy_rate;

    let derivation = match cached {
        Some(base) => {
            let penalty = base.transmittance * base.transmittance;
            LinkDerivation {
                mean_snr_d: db_to_linear(scenario.baseline_mean_snr_d_db) * penalty,
                mean_snr_e: db_to_linear(scenario.baseline_mean_snr_e_db) * penalty,
                ..*base
            }
        }
        None => match derive_link(&scenario) {
            Ok(d) => d,
            Err(e) => return SweepRow::failed(value, e.to_string()),
        },
    };

    let query = match SecrecyQuery::new(
        derivation.ew,
        derivation.mean_snr_d,
        derivation.mean_snr_e,
        spec.secrecy_rate,
        spec.convention,
    ) {
        Ok(q) => q,
        Err(e) => return SweepRow::failed(value, e.to_string()),
    };

    let mut row = SweepRow {
        grid_value: value,
        rytov_variance: derivation.turbulence.rytov_variance,
        scintillation_index: derivation.turbulence.scintillation_index,
        alpha: derivation.ew.alpha,
        beta: derivation.ew.beta,
        eta: derivation.ew.eta,
        transmittance: derivation.transmittance,
        effective_mean_snr_d_db: linear_to_db(derivation.mean_snr_d),
        effective_mean_snr_e_db: linear_to_db(derivation.mean_snr_e),
        sop: None,
        sop_raw: None,
        sop_outer_terms: None,
        ppsc: None,
        mc_sop: None,
        mc_ppsc: None,
        error: None,
    };

    for metric in &spec.metrics {
        match metric {
            Metric::Sop => match sop_closed_form_diag(&query, &spec.series, spec.formula) {
                Ok((v, diag)) => {
                    row.sop = Some(v);
                    row.sop_raw = Some(diag.raw_value);
                    row.sop_outer_terms = Some(diag.outer_terms);
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            },
            Metric::Ppsc => match ppsc_closed_form_with(&query, &spec.series, spec.formula) {
                Ok(v) => row.ppsc = Some(v),
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            },
        }
    }
    if let Some(mc) = &spec.mc {
        for metric in &spec.metrics {
            let result = match metric {
                Metric::Sop => estimate_sop(&query, mc).map(|est| row.mc_sop = Some(est)),
                Metric::Ppsc => estimate_ppsc(&query, mc).map(|est| row.mc_ppsc = Some(est)),
            };
            if let Err(e) = result {
                row.error = Some(e.to_string());
                return row;
            }
        }
    }
    row
}

// ---------------------------------------------------------------------------
// document ingestion

pub fn parse_scenario(text: &str, origin: &str) -> Result<LinkScenario> {
    let scenario: LinkScenario = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<LinkScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn scenario_to_toml(s: &LinkScenario) -> Result<String> {
    toml::to_string_pretty(s).map_err(|e| Error::Parse {
        path: format!("scenario {}", s.name),
        message: e.to_string(),
    })
}

/// Point override for a scenario field, `key` as it appears in the document.
pub fn apply_override(s: &mut LinkScenario, key: &str, value: &toml::Value) -> Result<()> {
    fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
        match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            toml::Value::String(s) => s.parse::<f64>().map_err(|_| {
                Error::domain("apply_override", format!("{key}: expected a number, got {s:?}"))
            }),
            other => Err(Error::domain(
                "apply_override",
                format!("{key}: expected a number, got {other}"),
            )),
        }
    }
    fn as_bool(key: &str, v: &toml::Value) -> Result<bool> {
        match v {
            toml::Value::Boolean(b) => Ok(*b),
            toml::Value::String(s) => s.parse::<bool>().map_err(|_| {
                Error::domain("apply_override", format!("{key}: expected a boolean, got {s:?}"))
            }),
            other => Err(Error::domain(
                "apply_override",
                format!("{key}: expected a boolean, got {other}"),
            )),
        }
    }
    match key {
        "name" => match value {
            toml::Value::String(v) => s.name = v.clone(),
            other => {
                return Err(Error::domain(
                    "apply_override",
                    format!("name: expected a string, got {other}"),
                ))
            }
        },
        "cloud_label" => match value {
            toml::Value::String(v) => s.cloud_label = v.clone(),
            other => {
                return Err(Error::domain(
                    "apply_override",
                    format!("cloud_label: expected a string, got {other}"),
                ))
            }
        },
        "transmitter_altitude_m" => s.transmitter_altitude_m = as_f64(key, value)?,
        "receiver_altitude_m" => s.receiver_altitude_m = as_f64(key, value)?,
        "zenith_angle_deg" => s.zenith_angle_deg = as_f64(key, value)?,
        "wind_speed_mps" => s.wind_speed_mps = as_f64(key, value)?,
        "ground_cn2" => s.ground_cn2 = as_f64(key, value)?,
        "wavelength_nm" => s.wavelength_nm = as_f64(key, value)?,
        "aperture_diameter_m" => s.aperture_diameter_m = as_f64(key, value)?,
        "eavesdropper_aperture_diameter_m" => {
            s.eavesdropper_aperture_diameter_m = Some(as_f64(key, value)?)
        }
        "baseline_mean_snr_d_db" => s.baseline_mean_snr_d_db = as_f64(key, value)?,
        "baseline_mean_snr_e_db" => s.baseline_mean_snr_e_db = as_f64(key, value)?,
        "secrecy_rate" => s.secrecy_rate = as_f64(key, value)?,
        "stratospheric_attenuation" => s.stratospheric_attenuation = as_bool(key, value)?,
        "stratospheric_coefficient_per_km" => {
            s.stratospheric_coefficient_per_km = Some(as_f64(key, value)?)
        }
        "cloud_attenuation" => s.cloud_attenuation = as_bool(key, value)?,
        "cloud_liquid_water_content_g_m3" => {
            s.cloud_liquid_water_content_g_m3 = Some(as_f64(key, value)?)
        }
        "cloud_droplet_concentration_per_cm3" => {
            s.cloud_droplet_concentration_per_cm3 = Some(as_f64(key, value)?)
        }
        "cloud_layer_thickness_km" => s.cloud_layer_thickness_km = Some(as_f64(key, value)?),
        "mie_attenuation" => s.mie_attenuation = as_bool(key, value)?,
        "mie_extinction_ratio" => s.mie_extinction_ratio = Some(as_f64(key, value)?),
        "allow_attenuation_out_of_envelope" => {
            s.allow_attenuation_out_of_envelope = as_bool(key, value)?
        }
        other => {
            return Err(Error::domain(
                "apply_override",
                format!("unknown scenario key {other:?}"),
            ))
        }
    }
    Ok(())
}

/// One curve of a sweep document: a scenario reference plus field overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSweep {
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDocument {
    schema_version: u32,
    sweep_variable: SweepVariable,
    grid: Vec<f64>,
    metrics: Vec<Metric>,
    #[serde(default)]
    secrecy_rate: Option<f64>,
    #[serde(default)]
    threshold_convention: Option<ThresholdConvention>,
    #[serde(default)]
    series: Option<SeriesControlDoc>,
    #[serde(default)]
    mc: Option<McDoc>,
    #[serde(rename = "curve")]
    curves: Vec<CurveDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesControlDoc {
    rel_tolerance: Option<f64>,
    max_terms: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McDoc {
    seed: u64,
    samples: u64,
    #[serde(default)]
    shards: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDoc {
    label: String,
    scenario: String,
    #[serde(default)]
    overrides: Option<toml::value::Table>,
}

/// Parse a sweep document; scenario paths resolve relative to `base_dir`.
pub fn parse_sweep(text: &str, base_dir: &Path, origin: &str) -> Result<Vec<NamedSweep>> {
    let doc: SweepDocument = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    if doc.schema_version != SWEEP_SCHEMA_VERSION {
        return Err(Error::Parse {
            path: origin.to_string(),
            message: format!(
                "schema_version: expected {SWEEP_SCHEMA_VERSION}, got {}",
                doc.schema_version
            ),
        });
    }
    if doc.curves.is_empty() {
        return Err(Error::Parse {
            path: origin.to_string(),
            message: "sweep document needs at least one [[curve]]".to_string(),
        });
    }
    let series = match &doc.series {
        Some(s) => SeriesControl::new(
            s.rel_tolerance.unwrap_or(1e-12),
            s.max_terms.unwrap_or(2000),
        )?,
        None => sweep_series_control(),
    };
    let mc = match &doc.mc {
        Some(m) => Some(McConfig::new(m.seed, m.samples, m.shards.unwrap_or(1))?),
        None => None,
    };
    let mut sweeps = Vec::with_capacity(doc.curves.len());
    for curve in &doc.curves {
        let scenario_path = base_dir.join(&curve.scenario);
        let mut scenario = load_scenario(&scenario_path)?;
        if let Some(overrides) = &curve.overrides {
            for (key, value) in overrides {
                apply_override(&mut scenario, key, value)?;
            }
            scenario.validate()?;
        }
        let secrecy_rate = doc.secrecy_rate.unwrap_or(scenario.secrecy_rate);
        let spec = SweepSpec {
            scenario,
            variable: doc.sweep_variable,
            grid: doc.grid.clone(),
            metrics: doc.metrics.clone(),
            secrecy_rate,
            convention: doc.threshold_convention.unwrap_or_default(),
            formula: SopFormula::Standard,
            series,
            mc,
        };
        spec.validate()?;
        sweeps.push(NamedSweep {
            label: curve.label.clone(),
            spec,
        });
    }
    Ok(sweeps)
}

pub fn load_sweep(path: &Path) -> Result<Vec<NamedSweep>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_sweep(&text, base, &path.display().to_string())
}
