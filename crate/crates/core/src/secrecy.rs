//! Closed-form secrecy metrics for a pair of exponentiated-Weibull SNR
//! channels that share fading parameters: secrecy outage probability and the
//! probability of positive secrecy capacity.
//!
//! The outage series integrates the destination CDF against the eavesdropper
//! density; with ∫₀^∞ γ^{β/2−1} e^{−Aγ^{β/2}} dγ = (2/β)A⁻¹ the scale
//! factors cancel and each term reduces to
//!   α (−1)^{ρ+k} C(α, ρ) C(α−1, k) / [(k+1) + ρ r],   r = (γ_th γ̄_E/γ̄_D)^{β/2}.
//! Summing the k-index with the Euler integral
//! Σ_k (−1)^k C(α−1, k) t^k = (1−t)^{α−1} collapses the double series to a
//! single series of Beta functions; see `standard_sop` for the two summation
//! orders that keep it well conditioned on both sides of r = 1.
//! The closed form uses the rate-threshold approximation γγ_th + γ_th − 1 ≈
//! γγ_th; `sop_quadrature` evaluates both the approximated and the exact
//! event so the approximation error can be quantified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ew::{cdf_snr, quantile, CdfMode, EwParams, SnrChannel};
use crate::quad::{integrate_with_splits, QuadControl};
use crate::series::{sum_series, SeriesControl, SeriesSum};
use crate::special::{ln_gamma, ln_gamma_ratio};

/// How a secrecy rate maps to the SNR-ratio threshold γ_th.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ThresholdConvention {
    /// γ_th = 2^{2 R_s}: the rate exponent is doubled.
    #[default]
    #[serde(rename = "doubled")]
    DoubledRate,
    /// γ_th = 2^{R_s}: the threshold implied by C_s < R_s with
    /// log₂(1+γ) capacities.
    #[serde(rename = "shannon")]
    Shannon,
}

pub fn threshold_from_rate(rate: f64, convention: ThresholdConvention) -> Result<f64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::domain(
            "threshold_from_rate",
            format!("secrecy rate must be ≥ 0, got {rate}"),
        ));
    }
    Ok(match convention {
        ThresholdConvention::DoubledRate => (2.0 * rate).exp2(),
        ThresholdConvention::Shannon => rate.exp2(),
    })
}

/// One destination/eavesdropper evaluation point. Both receivers share the
/// same EwParams; only their mean SNRs differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyQuery {
    pub ew: EwParams,
    pub mean_snr_d: f64,
    pub mean_snr_e: f64,
    pub secrecy_rate: f64,
    pub gamma_th: f64,
}

impl SecrecyQuery {
    pub fn new(
        ew: EwParams,
        mean_snr_d: f64,
        mean_snr_e: f64,
        secrecy_rate: f64,
        convention: ThresholdConvention,
    ) -> Result<Self> {
        for (name, v) in [("mean_snr_d", mean_snr_d), ("mean_snr_e", mean_snr_e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(
                    "SecrecyQuery",
                    format!("{name} must be positive and finite, got {v}"),
                ));
            }
        }
        let gamma_th = threshold_from_rate(secrecy_rate, convention)?;
        Ok(SecrecyQuery {
            ew,
            mean_snr_d,
            mean_snr_e,
            secrecy_rate,
            gamma_th,
        })
    }

    fn at_zero_rate(&self) -> SecrecyQuery {
        SecrecyQuery {
            secrecy_rate: 0.0,
            gamma_th: 1.0,
            ..*self
        }
    }
}

/// Which algebraic form of the outage series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SopFormula {
    /// Term denominator (k+1) + ρ(γ_th γ̄_E/γ̄_D)^{β/2}, the exact value of
    /// the CDF×PDF integral.
    #[default]
    Standard,
    /// Compatibility variant: denominator ((k+1) + ρ γ_th γ̄_E/γ̄_D)^{β/2},
    /// the addends unexponentiated and the bracket raised jointly. Its
    /// positive-capacity complement also keeps the query's γ_th instead of
    /// dropping to 1. Coincides with `Standard` at β = 2.
    AlternateBracket,
}

/// Convergence bookkeeping for one series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SopDiagnostics {
    /// Value before clamping to [0, 1].
    pub raw_value: f64,
    pub outer_terms: usize,
    /// Longest inner summation; 0 when the inner index was folded into a
    /// Beta function and never summed numerically.
    pub max_inner_terms: usize,
    /// Outer index contributing the largest magnitude; where to look first
    /// if a result is suspect.
    pub dominant_outer_index: usize,
    /// The outer sum stopped at its rounding floor rather than the relative
    /// tolerance; the absolute error is near ε times the gross term sum.
    pub saturated: bool,
    /// Raw value left [−1e-8, 1+1e-8]: the clamp hid more than roundoff.
    pub suspicious: bool,
}

/// The event whose probability the quadrature path evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventForm {
    /// γ_D < γ_th γ_E, the approximation the closed form uses.
    Approximated,
    /// 1 + γ_D < γ_th (1 + γ_E), the outage event without approximation.
    Exact,
}

pub fn sop_closed_form(q: &SecrecyQuery, ctl: &SeriesControl) -> Result<f64> {
    sop_closed_form_diag(q, ctl, SopFormula::Standard).map(|(v, _)| v)
}

pub fn sop_closed_form_diag(
    q: &SecrecyQuery,
    ctl: &SeriesControl,
    formula: SopFormula,
) -> Result<(f64, SopDiagnostics)> {
    let alpha = q.ew.alpha;
    let beta = q.ew.beta;
    let snr_ratio = q.gamma_th * q.mean_snr_e / q.mean_snr_d;
    match formula {
        SopFormula::Standard => standard_sop(alpha, snr_ratio.powf(0.5 * beta), ctl),
        SopFormula::AlternateBracket => alternate_sop(alpha, beta, snr_ratio, ctl),
    }
}

/// A probability whose series degenerated to a known limit (ratio 0 or ∞).
fn saturated_limit(value: f64) -> (f64, SopDiagnostics) {
    (
        value,
        SopDiagnostics {
            raw_value: value,
            outer_terms: 0,
            max_inner_terms: 0,
            dominant_outer_index: 0,
            saturated: false,
            suspicious: false,
        },
    )
}

fn finish(alpha: f64, sum: SeriesSum, max_inner_terms: usize) -> (f64, SopDiagnostics) {
    let raw = alpha * sum.value;
    let suspicious = !(-1e-8..=1.0 + 1e-8).contains(&raw);
    (
        raw.clamp(0.0, 1.0),
        SopDiagnostics {
            raw_value: raw,
            outer_terms: sum.terms_used,
            max_inner_terms,
            dominant_outer_index: sum.dominant_index,
            saturated: sum.saturated,
            suspicious,
        },
    )
}

/// The k-index of the double series has the exact value
/// Σ_k (−1)^k C(α−1, k)/((k+1) + ρr) = ∫₀¹ t^{ρr} (1−t)^{α−1} dt = B(ρr+1, α),
/// so the outage probability is a single series of Beta functions,
///   P = α Σ_ρ (−1)^ρ C(α, ρ) B(ρr+1, α).
/// Its terms decay like ρ^{−2α−1} but cancel down to ~r^α, so for r < 1 the
/// value is summed in the transposed order obtained from the substitution
/// t ↦ t^{1/r} in the same integral,
///   P = (α/r) Σ_j (−1)^j C(α−1, j) B((j+1)/r, α+1),
/// whose terms share the magnitude of the result. ln r is hoisted into the
/// exponent so the 1/r prefactor cannot overflow what the Beta underflows.
fn standard_sop(alpha: f64, r: f64, ctl: &SeriesControl) -> Result<(f64, SopDiagnostics)> {
    if r == 0.0 {
        return Ok(saturated_limit(0.0));
    }
    if !r.is_finite() {
        return Ok(saturated_limit(1.0));
    }
    let sum = if r >= 1.0 {
        let ln_gamma_alpha = ln_gamma(alpha);
        let mut signed_binom = 1.0;
        sum_series(ctl, "sop outer series", |rho| {
            let coeff = signed_binom;
            signed_binom *= (rho as f64 - alpha) / (rho as f64 + 1.0);
            coeff * (ln_gamma_alpha - ln_gamma_ratio(rho as f64 * r + 1.0, alpha)).exp()
        })?
    } else {
        let ln_gamma_alpha1 = ln_gamma(alpha + 1.0);
        let ln_r = r.ln();
        let mut signed_binom = 1.0;
        sum_series(ctl, "sop outer series", |j| {
            let coeff = signed_binom;
            signed_binom *= (j as f64 - (alpha - 1.0)) / (j as f64 + 1.0);
            let x = (j as f64 + 1.0) / r;
            coeff * (ln_gamma_alpha1 - ln_gamma_ratio(x, alpha + 1.0) - ln_r).exp()
        })?
    };
    Ok(finish(alpha, sum, 0))
}

/// The compatibility variant has no Beta collapse: its bracket carries the
/// β/2 exponent, so both indices are summed literally. The binomial factors
/// come from one running product per index.
fn alternate_sop(
    alpha: f64,
    beta: f64,
    s: f64,
    ctl: &SeriesControl,
) -> Result<(f64, SopDiagnostics)> {
    if s == 0.0 {
        return Ok(saturated_limit(0.0));
    }
    if !s.is_finite() {
        return Ok(saturated_limit(1.0));
    }
    let half_beta = 0.5 * beta;
    let mut inner_error: Option<Error> = None;
    let mut max_inner_terms = 0usize;
    let mut outer_signed = 1.0;
    let outer = sum_series(ctl, "sop outer series", |rho| {
        if inner_error.is_some() {
            return 0.0;
        }
        let outer_coeff = outer_signed;
        outer_signed *= (rho as f64 - alpha) / (rho as f64 + 1.0);
        let rho_s = rho as f64 * s;
        let mut inner_signed = 1.0;
        let inner = sum_series(ctl, "sop inner series", |k| {
            let coeff = inner_signed;
            inner_signed *= (k as f64 - (alpha - 1.0)) / (k as f64 + 1.0);
            coeff * ((k as f64 + 1.0) + rho_s).powf(-half_beta)
        });
        match inner {
            Ok(sum) => {
                max_inner_terms = max_inner_terms.max(sum.terms_used);
                outer_coeff * sum.value
            }
            Err(e) => {
                inner_error = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = inner_error {
        return Err(e);
    }
    Ok(finish(alpha, outer?, max_inner_terms))
}

/// P(C_s > 0) = 1 − P_SO at zero rate.
pub fn ppsc_closed_form(q: &SecrecyQuery, ctl: &SeriesControl) -> Result<f64> {
    ppsc_closed_form_with(q, ctl, SopFormula::Standard)
}

pub fn ppsc_closed_form_with(
    q: &SecrecyQuery,
    ctl: &SeriesControl,
    formula: SopFormula,
) -> Result<f64> {
    let base = match formula {
        // the positive-capacity event has threshold 1 regardless of rate
        SopFormula::Standard => q.at_zero_rate(),
        // the compatibility variant keeps the rate threshold in the bracket
        SopFormula::AlternateBracket => *q,
    };
    let (sop, _) = sop_closed_form_diag(&base, ctl, formula)?;
    Ok(1.0 - sop)
}

/// Outage probability by direct integration, substituting the eavesdropper
/// probability level u so the integral lives on (0, 1):
/// P = ∫₀¹ F_D(γ_th γ_E(u) + shift) du with shift 0 or γ_th − 1.
pub fn sop_quadrature(q: &SecrecyQuery, event: EventForm, rel_tolerance: f64) -> Result<f64> {
    let d = SnrChannel::new(q.ew, q.mean_snr_d)?;
    let shift = match event {
        EventForm::Approximated => 0.0,
        EventForm::Exact => q.gamma_th - 1.0,
    };
    let ctl = SeriesControl::default();
    let gamma_th = q.gamma_th;
    let mean_e = q.mean_snr_e;
    let ew = q.ew;
    let integrand = move |u: f64| {
        // deep panel subdivision can round a node onto an endpoint, where
        // the integrand takes its limit value
        if u >= 1.0 {
            return 1.0;
        }
        let gamma_e = if u <= 0.0 {
            0.0
        } else {
            let i_e = quantile(u, &ew).expect("u stays inside (0,1) on quadrature nodes");
            mean_e * i_e * i_e
        };
        cdf_snr(gamma_th * gamma_e + shift, &d, CdfMode::Exact, &ctl)
            .expect("nonnegative SNR argument")
    };
    let qc = QuadControl::with_rel_tolerance(rel_tolerance);
    let splits = [0.0, 1e-6, 1e-3, 0.1, 0.9, 1.0 - 1e-3, 1.0 - 1e-6, 1.0];
    let res = integrate_with_splits(integrand, &splits, &qc, "sop quadrature")?;
    Ok(res.value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ew::{normalize_eta, Normalization};
    use crate::series::CompensatedSum;
    use crate::special::binom_real;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn query(ew: EwParams, d_db: f64, e_db: f64, rate: f64) -> SecrecyQuery {
        SecrecyQuery::new(
            ew,
            crate::db_to_linear(d_db),
            crate::db_to_linear(e_db),
            rate,
            ThresholdConvention::DoubledRate,
        )
        .unwrap()
    }

    #[test]
    fn threshold_conventions() {
        assert_eq!(threshold_from_rate(0.0, ThresholdConvention::DoubledRate).unwrap(), 1.0);
        assert_eq!(threshold_from_rate(0.0, ThresholdConvention::Shannon).unwrap(), 1.0);
        assert_eq!(threshold_from_rate(1.0, ThresholdConvention::DoubledRate).unwrap(), 4.0);
        assert_eq!(threshold_from_rate(1.0, ThresholdConvention::Shannon).unwrap(), 2.0);
        let t = threshold_from_rate(0.01, ThresholdConvention::DoubledRate).unwrap();
        assert!((t - 2f64.powf(0.02)).abs() < 1e-15);
        assert!(threshold_from_rate(-0.1, ThresholdConvention::Shannon).is_err());
    }

    #[test]
    fn symmetric_exponential_pair_is_half() {
        let ew = EwParams::new(1.0, 2.0, 1.0).unwrap();
        let q = query(ew, 13.0, 13.0, 0.0);
        let sop = sop_closed_form(&q, &ctl()).unwrap();
        assert!((sop - 0.5).abs() < 1e-14, "got {sop}");
    }

    #[test]
    fn alpha_one_reduces_to_two_terms() {
        for beta in [0.7, 1.0, 2.0, 3.4] {
            let ew = EwParams::new(1.0, beta, 0.8).unwrap();
            for (d, e, rs) in [(20.0, 10.0, 0.01), (5.0, 8.0, 0.3), (30.0, 0.0, 1.0)] {
                let q = query(ew, d, e, rs);
                let r = (q.gamma_th * q.mean_snr_e / q.mean_snr_d).powf(0.5 * beta);
                let expected = 1.0 - 1.0 / (1.0 + r);
                let sop = sop_closed_form(&q, &ctl()).unwrap();
                assert!(
                    (sop - expected).abs() < 1e-13,
                    "β={beta} d={d} e={e} rs={rs}: {sop} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn integer_alpha_matches_finite_double_sum() {
        let ew = EwParams::new(5.0, 1.3, 0.9).unwrap();
        let q = query(ew, 18.0, 9.0, 0.05);
        let r = (q.gamma_th * q.mean_snr_e / q.mean_snr_d).powf(0.5 * ew.beta);
        let mut finite = CompensatedSum::default();
        for rho in 0..=5u32 {
            for k in 0..=4u32 {
                let sign = if (rho + k) % 2 == 0 { 1.0 } else { -1.0 };
                finite.add(
                    sign * binom_real(5.0, rho) * binom_real(4.0, k)
                        / (f64::from(k) + 1.0 + f64::from(rho) * r),
                );
            }
        }
        let expected = 5.0 * finite.value();
        let sop = sop_closed_form(&q, &ctl()).unwrap();
        assert!((sop - expected).abs() < 1e-13, "{sop} vs {expected}");
    }

    #[test]
    fn ppsc_complements_zero_rate_sop() {
        let ew = normalize_eta(5.8, 2.3, Normalization::UnitSecondMoment).unwrap();
        for (d, e) in [(25.0, 5.0), (10.0, 10.0), (3.0, 14.0)] {
            let q = query(ew, d, e, 0.35);
            let ppsc = ppsc_closed_form(&q, &ctl()).unwrap();
            let sop0 = sop_closed_form(&q.at_zero_rate(), &ctl()).unwrap();
            assert!((ppsc + sop0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_in_snrs_and_rate() {
        let ew = normalize_eta(4.2, 1.6, Normalization::UnitSecondMoment).unwrap();
        let mut prev = 1.0;
        for d_db in [0.0, 5.0, 10.0, 20.0, 30.0] {
            let sop = sop_closed_form(&query(ew, d_db, 8.0, 0.01), &ctl()).unwrap();
            assert!(sop <= prev, "SOP must fall as γ̄_D rises");
            prev = sop;
        }
        let mut prev = 0.0;
        for e_db in [0.0, 5.0, 10.0, 20.0] {
            let sop = sop_closed_form(&query(ew, 15.0, e_db, 0.01), &ctl()).unwrap();
            assert!(sop >= prev, "SOP must rise with γ̄_E");
            prev = sop;
        }
        let mut prev = 0.0;
        for rate in [0.0, 0.01, 0.1, 0.5, 1.0] {
            let sop = sop_closed_form(&query(ew, 15.0, 8.0, rate), &ctl()).unwrap();
            assert!(sop >= prev, "SOP must rise with the rate");
            prev = sop;
        }
    }

    #[test]
    fn depends_only_on_snr_ratio() {
        let ew = normalize_eta(3.7, 1.1, Normalization::UnitSecondMoment).unwrap();
        let a = sop_closed_form(&query(ew, 22.0, 7.0, 0.01), &ctl()).unwrap();
        let b = sop_closed_form(&query(ew, 34.0, 19.0, 0.01), &ctl()).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn extreme_ratios_saturate() {
        let ew = EwParams::new(2.5, 1.5, 0.9).unwrap();
        let strong = sop_closed_form(&query(ew, 60.0, 0.0, 0.01), &ctl()).unwrap();
        assert!(strong < 1e-6, "got {strong}");
        let weak = sop_closed_form(&query(ew, 0.0, 60.0, 0.01), &ctl()).unwrap();
        assert!(weak > 1.0 - 1e-6, "got {weak}");
    }

    #[test]
    fn matches_quadrature_of_approximated_event() {
        for (alpha, beta) in [(2.5, 1.5), (5.8, 2.2)] {
            let ew = normalize_eta(alpha, beta, Normalization::UnitSecondMoment).unwrap();
            for (d, e) in [(20.0, 10.0), (12.0, 4.0)] {
                let q = query(ew, d, e, 0.01);
                let series = sop_closed_form(&q, &ctl()).unwrap();
                let by_quad = sop_quadrature(&q, EventForm::Approximated, 1e-11).unwrap();
                assert!(
                    (series - by_quad).abs() < 1e-8,
                    "α={alpha} β={beta}: {series} vs {by_quad}"
                );
            }
        }
    }

    #[test]
    fn exact_event_exceeds_approximated_at_low_snr() {
        // the γ_th − 1 shift enlarges the outage region, so the exact-event
        // probability dominates the approximated one
        let ew = normalize_eta(5.8, 0.6, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 0.0, 5.0, 0.01);
        let approx = sop_quadrature(&q, EventForm::Approximated, 1e-10).unwrap();
        let exact = sop_quadrature(&q, EventForm::Exact, 1e-10).unwrap();
        assert!(exact > approx, "{exact} vs {approx}");
        assert!(exact - approx > 1e-3, "gap {:.3e}", exact - approx);
    }

    #[test]
    fn alternate_bracket_coincides_only_at_beta_two() {
        // the literal double sum converges like k^{−α−β/2}, so it needs a
        // far larger budget than the Beta-collapsed standard form
        let wide = SeriesControl {
            rel_tolerance: 1e-13,
            max_terms: 200_000,
        };
        let at_two = normalize_eta(3.3, 2.0, Normalization::UnitSecondMoment).unwrap();
        let q = query(at_two, 17.0, 6.0, 0.2);
        let std = sop_closed_form_diag(&q, &ctl(), SopFormula::Standard).unwrap().0;
        let alt = sop_closed_form_diag(&q, &wide, SopFormula::AlternateBracket).unwrap().0;
        assert!((std - alt).abs() < 1e-12, "{std} vs {alt}");

        let off_two = normalize_eta(3.3, 1.2, Normalization::UnitSecondMoment).unwrap();
        let q = query(off_two, 17.0, 6.0, 0.2);
        let std = sop_closed_form_diag(&q, &ctl(), SopFormula::Standard).unwrap().0;
        let alt = sop_closed_form_diag(&q, &wide, SopFormula::AlternateBracket).unwrap().0;
        assert!((std - alt).abs() > 1e-3, "variants must not blend: {std} vs {alt}");
    }

    #[test]
    fn diagnostics_report_convergence_shape() {
        let ew = normalize_eta(5.07, 0.91, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 20.0, 10.0, 0.01);
        let (v, diag) = sop_closed_form_diag(&q, &ctl(), SopFormula::Standard).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!(!diag.suspicious);
        assert!(diag.outer_terms >= 4);
        assert_eq!(diag.max_inner_terms, 0, "no inner index is summed numerically");
        assert!((diag.raw_value - v).abs() < 1e-15);
    }

    #[test]
    fn matches_arbitrary_precision_reference_points() {
        // 40-digit quadrature of α∫₀¹(1−t)^{α−1}(1−t^r)^α dt; the last point
        // exercises the transposed branch ~9 decades below the cancellation
        // floor of the untransposed order. The truncation tail is roughly
        // J/2α last terms, so the per-term tolerance sits well under the
        // 1e-12 target.
        let tight = SeriesControl {
            rel_tolerance: 1e-15,
            max_terms: 20_000,
        };
        let cases = [
            (5.0857269433, 0.9066988449, 100.0, 10.0, 0.01, 0.08207527488810719),
            (3.0421436600, 2.7789313297, 1.0, 3.16227766016838, 0.01, 0.9575621974893466),
            (1.9376301804, 6.3369567635, 1e4, 3.16227766016838, 0.01, 1.1363729792147955e-21),
        ];
        for (alpha, beta, snr_d, snr_e, rate, expected) in cases {
            let ew = normalize_eta(alpha, beta, Normalization::UnitSecondMoment).unwrap();
            let q = SecrecyQuery::new(ew, snr_d, snr_e, rate, ThresholdConvention::DoubledRate)
                .unwrap();
            let sop = sop_closed_form(&q, &tight).unwrap();
            assert!(
                ((sop - expected) / expected).abs() < 1e-12,
                "α={alpha} β={beta}: {sop:e} vs {expected:e}"
            );
        }
        // at equal SNRs and zero rate the integral is α∫(1−t)^{2α−1}dt = 1/2
        // for every shape pair
        let ew = normalize_eta(5.7796122690, 0.5949584463, Normalization::UnitSecondMoment)
            .unwrap();
        let q = SecrecyQuery::new(ew, 50.0, 50.0, 0.0, ThresholdConvention::DoubledRate).unwrap();
        let sop = sop_closed_form(&q, &tight).unwrap();
        assert!((sop - 0.5).abs() < 1e-13, "got {sop}");
    }

    #[test]
    fn tight_cap_errors_out() {
        let ew = normalize_eta(2.5, 0.8, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 20.0, 10.0, 0.01);
        let tight = SeriesControl {
            rel_tolerance: 1e-12,
            max_terms: 3,
        };
        assert!(matches!(
            sop_closed_form(&q, &tight),
            Err(Error::SeriesNotConverged { .. })
        ));
    }
}
