//! Stochastic oracle for the secrecy metrics: simulate the two
//! exponentiated-Weibull channels directly and count events. Streams are
//! counter-based and keyed by (seed, channel, draw index), so results are
//! bit-identical for any shard count and shards parallelize freely.

use crate::error::{Error, Result};
use crate::ew::{cdf_irradiance, open_unit_uniform, quantile, sample};
use crate::secrecy::SecrecyQuery;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub samples: u64,
    pub shards: u32,
}

impl McConfig {
    pub const MIN_SAMPLES: u64 = 1_000;

    pub fn new(seed: u64, samples: u64, shards: u32) -> Result<Self> {
        let cfg = McConfig {
            seed,
            samples,
            shards,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < Self::MIN_SAMPLES {
            return Err(Error::domain(
                "McConfig",
                format!("samples must be ≥ {}, got {}", Self::MIN_SAMPLES, self.samples),
            ));
        }
        if self.shards == 0 {
            return Err(Error::domain("McConfig", "shards must be ≥ 1".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

const DESTINATION_STREAM: u64 = 0;
const EAVESDROPPER_STREAM: u64 = 1;

/// One uniform draw consumes one 64-bit output, two 32-bit words of the
/// stream's counter space.
const WORDS_PER_DRAW: u128 = 2;

fn channel_rng(seed: u64, stream: u64, first_draw: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(WORDS_PER_DRAW * first_draw as u128);
    rng
}

fn shard_bounds(samples: u64, shards: u32) -> Vec<(u64, u64)> {
    let shards = shards as u64;
    (0..shards)
        .map(|s| (samples * s / shards, samples * (s + 1) / shards))
        .collect()
}

fn indicator_estimate(
    q: &SecrecyQuery,
    mc: &McConfig,
    event: impl Fn(f64, f64) -> bool + Sync,
) -> Result<McEstimate> {
    mc.validate()?;
    let hits: u64 = shard_bounds(mc.samples, mc.shards)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut rng_d = channel_rng(mc.seed, DESTINATION_STREAM, lo);
            let mut rng_e = channel_rng(mc.seed, EAVESDROPPER_STREAM, lo);
            let mut count = 0u64;
            for _ in lo..hi {
                let i_d = quantile(open_unit_uniform(&mut rng_d), &q.ew)
                    .expect("uniform draws stay inside (0,1)");
                let i_e = quantile(open_unit_uniform(&mut rng_e), &q.ew)
                    .expect("uniform draws stay inside (0,1)");
                let gamma_d = q.mean_snr_d * i_d * i_d;
                let gamma_e = q.mean_snr_e * i_e * i_e;
                if event(gamma_d, gamma_e) {
                    count += 1;
                }
            }
            count
        })
        .sum();
    let n = mc.samples as f64;
    let value = hits as f64 / n;
    Ok(McEstimate {
        value,
        std_error: (value * (1.0 - value) / n).sqrt(),
        samples: mc.samples,
    })
}

/// Outage frequency under the unapproximated event
/// 1 + γ_D < γ_th (1 + γ_E), with the query's threshold.
pub fn estimate_sop(q: &SecrecyQuery, mc: &McConfig) -> Result<McEstimate> {
    let gamma_th = q.gamma_th;
    indicator_estimate(q, mc, move |gamma_d, gamma_e| {
        1.0 + gamma_d < gamma_th * (1.0 + gamma_e)
    })
}

/// Frequency of positive secrecy capacity, event γ_D > γ_E.
pub fn estimate_ppsc(q: &SecrecyQuery, mc: &McConfig) -> Result<McEstimate> {
    indicator_estimate(q, mc, |gamma_d, gamma_e| gamma_d > gamma_e)
}

/// One-sample Kolmogorov–Smirnov statistic of the sampler against the
/// irradiance CDF. At the 1% level a well-formed sampler satisfies
/// D < 1.63/√n.
pub fn ks_check(p: &crate::ew::EwParams, n: usize, seed: u64) -> Result<f64> {
    if n < 10_000 {
        return Err(Error::domain(
            "ks_check",
            format!("need ≥ 10000 draws for a meaningful statistic, got {n}"),
        ));
    }
    let mut rng = channel_rng(seed, DESTINATION_STREAM, 0);
    let mut xs = sample(&mut rng, n, p)?;
    xs.sort_by(|a, b| a.partial_cmp(b).expect("samples are finite"));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf_irradiance(x, p)?;
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ew::{normalize_eta, EwParams, Normalization};
    use crate::secrecy::ThresholdConvention;

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
    fn config_validation() {
        assert!(McConfig::new(1, 999, 1).is_err());
        assert!(McConfig::new(1, 1_000, 0).is_err());
        assert!(McConfig::new(1, 1_000, 1).is_ok());
    }

    #[test]
    fn symmetric_link_is_a_coin_flip() {
        let ew = normalize_eta(5.07, 0.91, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 12.0, 12.0, 0.0);
        let mc = McConfig::new(42, 200_000, 1).unwrap();
        let sop = estimate_sop(&q, &mc).unwrap();
        assert!((sop.value - 0.5).abs() < 3.0 * sop.std_error, "{:?}", sop);
        let ppsc = estimate_ppsc(&q, &mc).unwrap();
        assert!((ppsc.value - 0.5).abs() < 3.0 * ppsc.std_error);
    }

    #[test]
    fn matches_analytic_exponential_case_at_high_snr() {
        // α=1, β=2 makes the closed form exact up to the threshold shift,
        // which is negligible at these SNRs
        let ew = EwParams::new(1.0, 2.0, 1.0).unwrap();
        let q = query(ew, 30.0, 0.0, 0.01);
        let r = q.gamma_th * q.mean_snr_e / q.mean_snr_d;
        let analytic = 1.0 - 1.0 / (1.0 + r);
        let mc = McConfig::new(7, 1_000_000, 1).unwrap();
        let est = estimate_sop(&q, &mc).unwrap();
        assert!(
            (est.value - analytic).abs() < 3.0 * est.std_error,
            "estimate {} vs analytic {analytic} (SE {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn deterministic_across_runs_and_shard_counts() {
        let ew = normalize_eta(2.5, 1.5, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 18.0, 6.0, 0.1);
        let reference = estimate_sop(&q, &McConfig::new(99, 100_000, 1).unwrap()).unwrap();
        for shards in [1, 4, 16] {
            let mc = McConfig::new(99, 100_000, shards).unwrap();
            let est = estimate_sop(&q, &mc).unwrap();
            assert_eq!(est.value, reference.value, "shards={shards}");
            assert_eq!(est.std_error, reference.std_error);
        }
        let again = estimate_sop(&q, &McConfig::new(99, 100_000, 1).unwrap()).unwrap();
        assert_eq!(again.value, reference.value);
    }

    #[test]
    fn ppsc_complements_zero_rate_sop_on_shared_draws() {
        let ew = normalize_eta(5.8, 0.6, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 14.0, 9.0, 0.0);
        // power-of-two sample count keeps both frequencies exact in binary
        let mc = McConfig::new(5, 1 << 17, 4).unwrap();
        let sop = estimate_sop(&q, &mc).unwrap();
        let ppsc = estimate_ppsc(&q, &mc).unwrap();
        assert_eq!(sop.value + ppsc.value, 1.0);
    }

    #[test]
    fn std_error_shrinks_like_inverse_sqrt() {
        let ew = normalize_eta(3.0, 1.2, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 15.0, 8.0, 0.05);
        let small = estimate_sop(&q, &McConfig::new(3, 50_000, 1).unwrap()).unwrap();
        let large = estimate_sop(&q, &McConfig::new(3, 200_000, 1).unwrap()).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn estimate_shape_invariants() {
        let ew = normalize_eta(2.0, 2.0, Normalization::UnitSecondMoment).unwrap();
        let q = query(ew, 25.0, 5.0, 0.01);
        let est = estimate_sop(&q, &McConfig::new(11, 10_000, 2).unwrap()).unwrap();
        assert!((0.0..=1.0).contains(&est.value));
        let expected_se = (est.value * (1.0 - est.value) / est.samples as f64).sqrt();
        assert_eq!(est.std_error, expected_se);
    }

    #[test]
    fn sampler_passes_ks_against_its_own_cdf() {
        let n = 50_000;
        let bound = 1.63 / (n as f64).sqrt();
        for (alpha, beta) in [(5.07, 0.91), (2.5, 1.5)] {
            let ew = normalize_eta(alpha, beta, Normalization::UnitSecondMoment).unwrap();
            let d = ks_check(&ew, n, 1234).unwrap();
            assert!(d >= 0.0);
            assert!(d < bound, "α={alpha} β={beta}: D={d} vs {bound}");
        }
    }

    #[test]
    fn ks_rejects_mismatched_shape() {
        let n = 50_000;
        let bound = 1.63 / (n as f64).sqrt();
        let ew = normalize_eta(3.0, 1.1, Normalization::UnitSecondMoment).unwrap();
        let skewed = EwParams::new(ew.alpha * 1.2, ew.beta, ew.eta).unwrap();
        let mut rng = channel_rng(77, DESTINATION_STREAM, 0);
        let mut xs = sample(&mut rng, n, &ew).unwrap();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let nf = n as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = cdf_irradiance(x, &skewed).unwrap();
            d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
        }
        assert!(d > bound, "mismatch must fail: D={d} vs {bound}");
    }

    #[test]
    fn ks_needs_enough_draws() {
        let ew = EwParams::new(2.0, 2.0, 1.0).unwrap();
        assert!(ks_check(&ew, 9_999, 1).is_err());
    }
}
