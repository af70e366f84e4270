//! The three subcommands. Each returns `Failure` carrying its exit code.

use crate::output::{self, fmt_float, CurveOutput};
use crate::{
    convention_name, formula_name, ChannelArgs, Failure, KeyValue, ReportFormat, SweepArgs,
    ValidateArgs,
};
use optsec_core::attenuation::{
    composite_transmittance, geometric_transmittance, mie_transmittance,
    stratospheric_transmittance,
};
use optsec_core::ew::{EwParams, Normalization};
use optsec_core::montecarlo::{estimate_sop, McConfig};
use optsec_core::scenario::{
    apply_override, derive_query, load_scenario, load_sweep, run_sweep, sweep_series_control,
    LinkScenario, Receiver,
};
use optsec_core::secrecy::{sop_closed_form_diag, SecrecyQuery, SopFormula, ThresholdConvention};
use optsec_core::turbulence::{analyze, fit_ew_params};
use optsec_core::{db_to_linear, linear_to_db};
use std::path::Path;

fn load_scenario_with_overrides(
    path: &Path,
    overrides: &[KeyValue],
) -> Result<LinkScenario, Failure> {
    let mut s = load_scenario(path)?;
    for kv in overrides {
        apply_override(&mut s, &kv.key, &kv.value)?;
    }
    s.validate()?;
    Ok(s)
}

fn receiver_name(r: Receiver) -> &'static str {
    match r {
        Receiver::Destination => "destination",
        Receiver::Eavesdropper => "eavesdropper",
    }
}

/// Every quantity derived for one receiver's channel, in derivation order.
#[derive(serde::Serialize)]
struct ChannelReport {
    scenario: String,
    scenario_sha256: String,
    receiver: &'static str,
    zenith_angle_deg: f64,
    path_length_m: f64,
    aperture_diameter_m: f64,
    aperture_parameter: f64,
    rytov_variance: f64,
    scintillation_index: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    stratospheric_transmittance: Option<f64>,
    geometric_transmittance: Option<f64>,
    mie_transmittance: Option<f64>,
    composite_transmittance: f64,
    baseline_mean_snr_db: f64,
    effective_mean_snr: f64,
    effective_mean_snr_db: f64,
}

impl ChannelReport {
    fn build(s: &LinkScenario, receiver: Receiver) -> Result<ChannelReport, Failure> {
        let path = s.turbulence_path(receiver);
        let turbulence = analyze(&path)?;
        let ew = fit_ew_params(turbulence.scintillation_index, Normalization::UnitSecondMoment)?;
        let stack = s.attenuation_stack()?;
        let stratospheric = stack
            .stratospheric
            .map(|l| stratospheric_transmittance(l.coefficient, l.path_km))
            .transpose()?;
        let geometric = stack
            .geometric
            .map(|l| geometric_transmittance(l.visibility_km, l.wavelength_nm, l.path_km))
            .transpose()?;
        let mie = stack
            .mie
            .map(|l| mie_transmittance(l.extinction_ratio, l.zenith_angle))
            .transpose()?;
        let composite = composite_transmittance(&stack)?;
        let baseline_db = match receiver {
            Receiver::Destination => s.baseline_mean_snr_d_db,
            Receiver::Eavesdropper => s.baseline_mean_snr_e_db,
        };
        let effective = db_to_linear(baseline_db) * composite * composite;
        Ok(ChannelReport {
            scenario: s.name.clone(),
            scenario_sha256: output::scenario_sha256(s)?,
            receiver: receiver_name(receiver),
            zenith_angle_deg: s.zenith_angle_deg,
            path_length_m: turbulence.path_length,
            aperture_diameter_m: path.aperture_diameter,
            aperture_parameter: turbulence.aperture_parameter,
            rytov_variance: turbulence.rytov_variance,
            scintillation_index: turbulence.scintillation_index,
            alpha: ew.alpha,
            beta: ew.beta,
            eta: ew.eta,
            stratospheric_transmittance: stratospheric,
            geometric_transmittance: geometric,
            mie_transmittance: mie,
            composite_transmittance: composite,
            baseline_mean_snr_db: baseline_db,
            effective_mean_snr: effective,
            effective_mean_snr_db: linear_to_db(effective),
        })
    }

    fn text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_float);
        let pairs: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.clone()),
            ("scenario_sha256", self.scenario_sha256.clone()),
            ("receiver", self.receiver.to_string()),
            ("zenith_angle_deg", fmt_float(self.zenith_angle_deg)),
            ("path_length_m", fmt_float(self.path_length_m)),
            ("aperture_diameter_m", fmt_float(self.aperture_diameter_m)),
            ("aperture_parameter", fmt_float(self.aperture_parameter)),
            ("rytov_variance", fmt_float(self.rytov_variance)),
            ("scintillation_index", fmt_float(self.scintillation_index)),
            ("alpha", fmt_float(self.alpha)),
            ("beta", fmt_float(self.beta)),
            ("eta", fmt_float(self.eta)),
            (
                "stratospheric_transmittance",
                opt(self.stratospheric_transmittance),
            ),
            ("geometric_transmittance", opt(self.geometric_transmittance)),
            ("mie_transmittance", opt(self.mie_transmittance)),
            (
                "composite_transmittance",
                fmt_float(self.composite_transmittance),
            ),
            ("baseline_mean_snr_db", fmt_float(self.baseline_mean_snr_db)),
            ("effective_mean_snr", fmt_float(self.effective_mean_snr)),
            ("effective_mean_snr_db", fmt_float(self.effective_mean_snr_db)),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

pub fn channel(args: ChannelArgs) -> Result<(), Failure> {
    let scenario = load_scenario_with_overrides(&args.scenario, &args.overrides)?;
    let report = ChannelReport::build(&scenario, args.receiver.into())?;
    match args.format {
        ReportFormat::Text => print!("{}", report.text()),
        ReportFormat::Json => {
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::Io(e.to_string()))?;
            println!("{json}");
        }
    }
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut curves = load_sweep(&args.spec)?;
    for named in &mut curves {
        let spec = &mut named.spec;
        for kv in &args.overrides {
            apply_override(&mut spec.scenario, &kv.key, &kv.value)?;
        }
        spec.scenario.validate()?;
        if let Some(rate) = args.rate {
            spec.secrecy_rate = rate;
            spec.scenario.secrecy_rate = rate;
        }
        if let Some(conv) = args.threshold_convention {
            spec.convention = conv.into();
        }
        if args.alternate_sop_form {
            spec.formula = SopFormula::AlternateBracket;
        }
        spec.mc = if args.with_mc {
            let base = spec.mc;
            let seed = args.seed.or(base.map(|m| m.seed)).unwrap_or(0);
            let samples = args.mc_samples.or(base.map(|m| m.samples)).unwrap_or(100_000);
            let shards = args.shards.or(base.map(|m| m.shards)).unwrap_or(1);
            Some(McConfig::new(seed, samples, shards)?)
        } else {
            None
        };
        spec.validate()?;
    }
    let results = curves
        .iter()
        .map(|named| run_sweep(&named.spec))
        .collect::<Result<Vec<_>, _>>()?;
    let outputs: Vec<CurveOutput> = curves
        .iter()
        .zip(&results)
        .map(|(named, rows)| CurveOutput {
            label: &named.label,
            spec: &named.spec,
            rows,
        })
        .collect();
    output::write_sweep_outputs(&outputs, args.out.as_deref(), args.format)
}

fn value_as_f64(key: &str, v: &toml::Value) -> Result<f64, Failure> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Failure::Usage(format!(
            "{key}: expected a number, got {other}"
        ))),
    }
}

pub fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let mut beta_scale: Option<f64> = None;
    let mut scenario_overrides: Vec<KeyValue> = Vec::new();
    for kv in &args.overrides {
        if kv.key == "check.beta_scale" {
            beta_scale = Some(value_as_f64(&kv.key, &kv.value)?);
        } else {
            scenario_overrides.push(kv.clone());
        }
    }
    let mut scenario = load_scenario_with_overrides(&args.scenario, &scenario_overrides)?;
    if let Some(rate) = args.rate {
        scenario.secrecy_rate = rate;
    }
    if args.grid.is_empty() {
        return Err(Failure::Usage("grid: must not be empty".to_string()));
    }
    let convention: ThresholdConvention = args
        .threshold_convention
        .map(Into::into)
        .unwrap_or_default();
    let formula = if args.alternate_sop_form {
        SopFormula::AlternateBracket
    } else {
        SopFormula::Standard
    };
    let mc = McConfig::new(args.seed, args.mc_samples, args.shards)?;
    let ctl = sweep_series_control();

    println!("# optsec validate");
    println!("# scenario = {}", scenario.name);
    println!("# scenario_sha256 = {}", output::scenario_sha256(&scenario)?);
    println!("# seed = {}", mc.seed);
    println!("# mc_samples = {}", mc.samples);
    println!("# mc_shards = {}", mc.shards);
    println!("# baseline_mean_snr_e_db = {}", fmt_float(scenario.baseline_mean_snr_e_db));
    println!("# secrecy_rate = {}", fmt_float(scenario.secrecy_rate));
    println!("# threshold_convention = {}", convention_name(convention));
    println!("# sop_formula = {}", formula_name(formula));
    if let Some(scale) = beta_scale {
        println!("# check.beta_scale = {}", fmt_float(scale));
    }
    println!("# gate: |closed_form - monte_carlo| <= max(3*std_error, 1.0e-3)");
    println!("# columns: baseline_mean_snr_d_db closed_form monte_carlo std_error abs_diff gate verdict");

    struct Outcome {
        snr_db: f64,
        diff: f64,
        gate: f64,
        pass: bool,
    }
    let mut outcomes: Vec<Outcome> = Vec::with_capacity(args.grid.len());
    for &snr_db in &args.grid {
        let mut point = scenario.clone();
        point.baseline_mean_snr_d_db = snr_db;
        let (query, _) = derive_query(&point, convention)?;
        let estimate = estimate_sop(&query, &mc)?;
        let closed_query = match beta_scale {
            None => query,
            Some(scale) => {
                let ew = EwParams::new(query.ew.alpha, query.ew.beta * scale, query.ew.eta)?;
                SecrecyQuery::new(
                    ew,
                    query.mean_snr_d,
                    query.mean_snr_e,
                    query.secrecy_rate,
                    convention,
                )?
            }
        };
        let (closed, _) = sop_closed_form_diag(&closed_query, &ctl, formula)?;
        let diff = (closed - estimate.value).abs();
        let gate = (3.0 * estimate.std_error).max(1e-3);
        let pass = diff <= gate;
        println!(
            "{} {} {} {} {} {} {}",
            fmt_float(snr_db),
            fmt_float(closed),
            fmt_float(estimate.value),
            fmt_float(estimate.std_error),
            fmt_float(diff),
            fmt_float(gate),
            if pass { "PASS" } else { "FAIL" }
        );
        outcomes.push(Outcome {
            snr_db,
            diff,
            gate,
            pass,
        });
    }

    let worst = outcomes
        .iter()
        .max_by(|a, b| (a.diff / a.gate).total_cmp(&(b.diff / b.gate)))
        .expect("grid is non-empty");
    println!(
        "# worst: baseline_mean_snr_d_db = {}, abs_diff = {}, gate = {}, ratio = {}",
        fmt_float(worst.snr_db),
        fmt_float(worst.diff),
        fmt_float(worst.gate),
        fmt_float(worst.diff / worst.gate)
    );
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let total = outcomes.len();
    if passed == total {
        println!("# result: PASS ({passed}/{total} points within gate)");
        Ok(())
    } else {
        println!("# result: FAIL ({passed}/{total} points within gate)");
        Err(Failure::Gate(format!(
            "closed form disagrees with Monte-Carlo at {}/{total} grid points; \
             worst at baseline_mean_snr_d_db = {}: |closed - mc| = {} exceeds gate {}",
            total - passed,
            fmt_float(worst.snr_db),
            fmt_float(worst.diff),
            fmt_float(worst.gate)
        )))
    }
}
