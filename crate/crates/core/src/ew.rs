//! The exponentiated-Weibull irradiance/SNR channel.
//!
//! Irradiance I follows the three-parameter law with shape pair (α, β) and
//! scale η; the received SNR is γ = γ̄ I² with E[I²] = 1 enforced through η.
//! Everything here is exact math on that family: densities, distribution
//! functions, quantiles, moments, normalization, inverse-transform sampling.

use crate::error::{Error, Result};
use crate::series::{sum_series, SeriesControl, SeriesSum};
use crate::special::{binom_real, ln_gamma};
use rand::RngCore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwParams {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl EwParams {
    pub fn new(alpha: f64, beta: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("eta", eta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "EwParams",
                    format!("{name} must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(EwParams { alpha, beta, eta })
    }
}

/// Which moment the scale parameter η is solved against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// E[I²] = 1, the convention the SNR mapping γ = γ̄ I² requires.
    #[default]
    UnitSecondMoment,
    /// E[I] = 1, common in the distribution-fitting literature.
    UnitMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrChannel {
    pub ew: EwParams,
    pub mean_snr: f64,
}

impl SnrChannel {
    pub fn new(ew: EwParams, mean_snr: f64) -> Result<Self> {
        if !(mean_snr > 0.0 && mean_snr.is_finite()) {
            return Err(Error::domain(
                "SnrChannel",
                format!("mean_snr must be positive and finite, got {mean_snr}"),
            ));
        }
        Ok(SnrChannel { ew, mean_snr })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMode {
    Exact,
    Series,
}

/// ln(1 − e^{−z}) for z > 0 without cancellation on either end.
fn ln_one_minus_exp(z: f64) -> f64 {
    if z > std::f64::consts::LN_2 {
        (-(-z).exp()).ln_1p()
    } else {
        (-(-z).exp_m1()).ln()
    }
}

/// Irradiance density (αβ/η)(I/η)^{β−1} e^{−(I/η)^β} (1 − e^{−(I/η)^β})^{α−1}.
pub fn pdf_irradiance(i: f64, p: &EwParams) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::domain(
            "pdf_irradiance",
            format!("irradiance must be ≥ 0, got {i}"),
        ));
    }
    if i == 0.0 {
        // limit of (I/η)^{β−1}(1−e^{−(I/η)^β})^{α−1} ~ (I/η)^{αβ−1}
        return Ok(match p.alpha * p.beta {
            x if x > 1.0 => 0.0,
            x if x == 1.0 => 1.0 / p.eta,
            _ => f64::INFINITY,
        });
    }
    let r = i / p.eta;
    let z = r.powf(p.beta);
    let ln_f = (p.alpha * p.beta / p.eta).ln() + (p.beta - 1.0) * r.ln() - z
        + (p.alpha - 1.0) * ln_one_minus_exp(z);
    Ok(ln_f.exp())
}

/// Irradiance distribution function (1 − e^{−(I/η)^β})^α.
pub fn cdf_irradiance(i: f64, p: &EwParams) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::domain(
            "cdf_irradiance",
            format!("irradiance must be ≥ 0, got {i}"),
        ));
    }
    if i == 0.0 {
        return Ok(0.0);
    }
    let z = (i / p.eta).powf(p.beta);
    Ok((p.alpha * ln_one_minus_exp(z)).exp())
}

/// Inverse of `cdf_irradiance` on (0, 1): η(−ln(1 − u^{1/α}))^{1/β}.
pub fn quantile(u: f64, p: &EwParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(
            "quantile",
            format!("u must lie in the open interval (0, 1), got {u}"),
        ));
    }
    let ln_w = u.ln() / p.alpha;
    // t = −ln(1 − e^{ln_w}), branched to keep full precision at both tails
    let t = if ln_w < -std::f64::consts::LN_2 {
        -(-ln_w.exp()).ln_1p()
    } else {
        -(-ln_w.exp_m1()).ln()
    };
    Ok(p.eta * t.powf(1.0 / p.beta))
}

/// 2^{−53}, the spacing of the open-interval uniform grid.
const U64_TO_UNIT: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Uniform draw on the open interval (0, 1): (x₅₃ + ½)·2^{−53}.
pub(crate) fn open_unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * U64_TO_UNIT
}

/// n inverse-transform draws of irradiance; deterministic given the stream.
pub fn sample<R: RngCore + ?Sized>(rng: &mut R, n: usize, p: &EwParams) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample", "draw count must be ≥ 1"));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u = open_unit_uniform(rng);
        out.push(quantile(u, p)?);
    }
    Ok(out)
}

/// E[I^n] = α η^n Γ(1 + n/β) Σ_j (−1)^j C(α−1, j) (j+1)^{−(1+n/β)}.
///
/// The tail decays like j^{−(α+1+n/β)}, so near-integer α with small β can
/// need far more terms than the default cap; `normalize_eta` passes a wider
/// budget internally.
pub fn moment(n: u32, p: &EwParams, ctl: &SeriesControl) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("moment", "moment order must be ≥ 1"));
    }
    let e = 1.0 + f64::from(n) / p.beta;
    let s = sum_series(ctl, "ew moment", |j| {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * binom_real(p.alpha - 1.0, j as u32) * (j as f64 + 1.0).powf(-e)
    })?;
    Ok(p.alpha * p.eta.powf(f64::from(n)) * ln_gamma(e).exp() * s.value)
}

fn wide_moment_ctl() -> SeriesControl {
    // the binomial tail decays like j^{−α−1−n/β}; shallow shape parameters
    // (α near 1, large β) legitimately need tens of thousands of terms
    SeriesControl {
        rel_tolerance: 1e-13,
        max_terms: 200_000,
    }
}

/// Solves η so the selected moment equals one. Moments scale as η^n, so the
/// root is the direct solve η = m_n(α, β, 1)^{−1/n}.
pub fn normalize_eta(alpha: f64, beta: f64, normalization: Normalization) -> Result<EwParams> {
    let unit = EwParams::new(alpha, beta, 1.0)?;
    let ctl = wide_moment_ctl();
    let eta = match normalization {
        Normalization::UnitSecondMoment => moment(2, &unit, &ctl)?.powf(-0.5),
        Normalization::UnitMean => moment(1, &unit, &ctl)?.recip(),
    };
    EwParams::new(alpha, beta, eta)
}

fn snr_exponent(gamma: f64, ch: &SnrChannel) -> f64 {
    // z = (γ / (η² γ̄))^{β/2}, shared by the CDF and PDF forms
    (gamma / (ch.ew.eta * ch.ew.eta * ch.mean_snr)).powf(0.5 * ch.ew.beta)
}

/// SNR distribution function, exact form (1 − e^{−z})^α or its
/// generalized-binomial series Σ_ρ C(α, ρ)(−1)^ρ e^{−ρz}.
pub fn cdf_snr(gamma: f64, ch: &SnrChannel, mode: CdfMode, ctl: &SeriesControl) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain(
            "cdf_snr",
            format!("SNR must be ≥ 0, got {gamma}"),
        ));
    }
    match mode {
        CdfMode::Exact => {
            if gamma == 0.0 {
                return Ok(0.0);
            }
            let z = snr_exponent(gamma, ch);
            Ok((ch.ew.alpha * ln_one_minus_exp(z)).exp())
        }
        CdfMode::Series => {
            let z = snr_exponent(gamma, ch);
            let s = cdf_snr_series(z, ch.ew.alpha, ctl)?;
            Ok(s.value)
        }
    }
}

pub(crate) fn cdf_snr_series(z: f64, alpha: f64, ctl: &SeriesControl) -> Result<SeriesSum> {
    sum_series(ctl, "snr cdf series", |rho| {
        let sign = if rho % 2 == 0 { 1.0 } else { -1.0 };
        sign * binom_real(alpha, rho as u32) * (-(rho as f64) * z).exp()
    })
}

/// SNR density: exact derivative α(1−e^{−z})^{α−1} e^{−z} (β/2) z/γ of the
/// closed CDF, or the term-wise derivative of the series.
pub fn pdf_snr(gamma: f64, ch: &SnrChannel, mode: CdfMode, ctl: &SeriesControl) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(
            "pdf_snr",
            format!("SNR must be > 0, got {gamma}"),
        ));
    }
    let z = snr_exponent(gamma, ch);
    let jac = 0.5 * ch.ew.beta * z / gamma;
    match mode {
        CdfMode::Exact => {
            let ln_f =
                ch.ew.alpha.ln() + (ch.ew.alpha - 1.0) * ln_one_minus_exp(z) - z + jac.ln();
            Ok(ln_f.exp())
        }
        CdfMode::Series => {
            let s = sum_series(ctl, "snr pdf series", |k| {
                let rho = k as f64 + 1.0;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * binom_real(ch.ew.alpha, k as u32 + 1) * rho * (-rho * z).exp()
            })?;
            Ok(s.value * jac)
        }
    }
}
