//! End-to-end checks of the binary: report content, output formats, exit
//! codes, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optsec"))
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn scenario_arg(name: &str) -> String {
    repo_path(&format!("scenarios/{name}")).display().to_string()
}

/// Header plus data rows of a CSV table, `#` comment lines skipped.
fn parse_table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .expect("header row")
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.expect("data row").iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn metadata_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[test]
fn channel_json_matches_library_derivation() {
    let out = run(&[
        "channel",
        "--scenario",
        &scenario_arg("satellite_haps.scenario"),
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("json");

    let scenario =
        optsec_core::scenario::load_scenario(&repo_path("scenarios/satellite_haps.scenario"))
            .expect("scenario loads");
    let derivation = optsec_core::scenario::derive_link(&scenario).expect("derives");
    let get = |k: &str| report[k].as_f64().unwrap_or_else(|| panic!("field {k}"));
    // the binary and this harness compile at different optimization levels,
    // so agreement is to rounding, not bit-exact
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
    assert!(close(get("rytov_variance"), derivation.turbulence.rytov_variance));
    assert!(close(
        get("scintillation_index"),
        derivation.turbulence.scintillation_index
    ));
    assert!(close(get("alpha"), derivation.ew.alpha));
    assert!(close(get("beta"), derivation.ew.beta));
    assert!(close(get("eta"), derivation.ew.eta));
    assert!(close(get("composite_transmittance"), derivation.transmittance));
    assert!(close(get("effective_mean_snr"), derivation.mean_snr_d));
    assert_eq!(report["receiver"].as_str(), Some("destination"));
    assert_eq!(report["scenario"].as_str(), Some("satellite-haps"));
    let sha = report["scenario_sha256"].as_str().expect("sha field");
    assert_eq!(sha.len(), 64);
    assert!(sha.chars().all(|c| c.is_ascii_hexdigit()));
    // the only active factor on this link is the composite
    let strat = get("stratospheric_transmittance");
    assert!(report["geometric_transmittance"].is_null());
    assert!(report["mie_transmittance"].is_null());
    assert_eq!(strat, get("composite_transmittance"));
}

#[test]
fn channel_text_and_json_carry_the_same_values() {
    let args = [
        "channel",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--receiver",
        "eavesdropper",
    ];
    let text_out = run(&args);
    let json_out = run(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(exit_code(&text_out), 0);
    assert_eq!(exit_code(&json_out), 0);

    let report: serde_json::Value = serde_json::from_str(&stdout_str(&json_out)).expect("json");
    let mut checked = 0;
    for (key, value) in metadata_lines(&format!(
        "# {}",
        stdout_str(&text_out).replace('\n', "\n# ")
    )) {
        let json_value = &report[&key];
        if value == "none" {
            assert!(json_value.is_null(), "{key}: text none, json {json_value}");
        } else if let Ok(v) = value.parse::<f64>() {
            if let Some(jv) = json_value.as_f64() {
                assert_eq!(v, jv, "{key}: text {value} vs json {jv}");
                checked += 1;
                continue;
            }
            assert_eq!(json_value.as_str(), Some(value.as_str()), "{key}");
        } else {
            assert_eq!(json_value.as_str(), Some(value.as_str()), "{key}");
        }
    }
    assert!(checked >= 12, "only {checked} numeric fields compared");
}

#[test]
fn channel_override_moves_turbulence_fields() {
    let base = run(&[
        "channel",
        "--scenario",
        &scenario_arg("satellite_haps.scenario"),
        "--format",
        "json",
    ]);
    let steep = run(&[
        "channel",
        "--scenario",
        &scenario_arg("satellite_haps.scenario"),
        "--override",
        "zenith_angle_deg=80",
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&steep), 0);
    let b: serde_json::Value = serde_json::from_str(&stdout_str(&base)).expect("json");
    let s: serde_json::Value = serde_json::from_str(&stdout_str(&steep)).expect("json");
    assert_eq!(s["zenith_angle_deg"].as_f64(), Some(80.0));
    for key in ["rytov_variance", "scintillation_index", "alpha", "beta"] {
        assert_ne!(
            b[key].as_f64(),
            s[key].as_f64(),
            "{key} should react to the zenith override"
        );
    }
    assert_ne!(b["scenario_sha256"], s["scenario_sha256"]);
}

fn write_sweep_doc(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("test.sweep");
    std::fs::write(&path, body).expect("write sweep doc");
    path
}

fn small_sweep_doc(dir: &Path) -> PathBuf {
    let scenario = scenario_arg("haps_uav.scenario");
    write_sweep_doc(
        dir,
        &format!(
            r#"
schema_version = 1
sweep_variable = "baseline_mean_snr_d_db"
grid = [10.0, 20.0, 30.0]
metrics = ["sop", "ppsc"]
secrecy_rate = 0.01

[[curve]]
label = "Mixed CASE label"
scenario = "{scenario}"
"#
        ),
    )
}

#[test]
fn sweep_csv_and_json_encode_identical_data() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = small_sweep_doc(dir.path());
    let csv_path = dir.path().join("t.csv");
    let json_path = dir.path().join("t.json");
    let common = [
        "sweep",
        "--spec",
        spec.to_str().expect("utf-8 path"),
        "--with-mc",
        "--seed",
        "3",
        "--mc-samples",
        "20000",
    ];
    let csv_out = run(&[
        &common[..],
        &["--out", csv_path.to_str().expect("utf-8"), "--format", "csv"],
    ]
    .concat());
    let json_out = run(&[
        &common[..],
        &["--out", json_path.to_str().expect("utf-8"), "--format", "json"],
    ]
    .concat());
    assert_eq!(exit_code(&csv_out), 0, "{csv_out:?}");
    assert_eq!(exit_code(&json_out), 0);

    let csv_text = std::fs::read_to_string(&csv_path).expect("csv exists");
    let (header, rows) = parse_table(&csv_text);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).expect("json exists"))
            .expect("parses");
    let json_rows = doc["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 3);
    assert_eq!(json_rows.len(), 3);
    assert_eq!(header.last().map(String::as_str), Some("status"));
    assert_eq!(header.first().map(String::as_str), Some("baseline_mean_snr_d_db"));

    for (cells, json_row) in rows.iter().zip(json_rows) {
        for (name, cell) in header.iter().zip(cells) {
            let jv = &json_row[name];
            if cell.is_empty() {
                assert!(jv.is_null(), "{name}: csv empty, json {jv}");
            } else if let Some(jf) = jv.as_f64() {
                let cf: f64 = cell.parse().expect("numeric cell");
                assert_eq!(cf, jf, "{name}: csv {cell} reparsed != json {jf}");
            } else if let Some(ji) = jv.as_u64() {
                assert_eq!(cell.parse::<u64>().expect("int cell"), ji, "{name}");
            } else {
                assert_eq!(jv.as_str(), Some(cell.as_str()), "{name}");
            }
        }
    }

    // metadata blocks agree as well
    let meta: std::collections::BTreeMap<_, _> = metadata_lines(&csv_text).into_iter().collect();
    assert_eq!(doc["metadata"]["curve"].as_str(), Some("Mixed CASE label"));
    assert_eq!(meta["curve"], "Mixed CASE label");
    assert_eq!(
        doc["metadata"]["scenario_sha256"].as_str(),
        Some(meta["scenario_sha256"].as_str())
    );
    assert_eq!(meta["mc_seed"], "3");
    assert_eq!(meta["mc_samples"], "20000");
}

#[test]
fn sweep_is_bit_identical_across_runs_and_shard_invariant() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = small_sweep_doc(dir.path());
    let mut outputs: Vec<String> = Vec::new();
    for (run_idx, shards) in [(0, "4"), (1, "4"), (2, "1"), (3, "16")] {
        let path = dir.path().join(format!("run{run_idx}.csv"));
        let out = run(&[
            "sweep",
            "--spec",
            spec.to_str().expect("utf-8"),
            "--with-mc",
            "--seed",
            "11",
            "--mc-samples",
            "30000",
            "--shards",
            shards,
            "--out",
            path.to_str().expect("utf-8"),
        ]);
        assert_eq!(exit_code(&out), 0);
        outputs.push(std::fs::read_to_string(&path).expect("csv exists"));
    }
    assert_eq!(outputs[0], outputs[1], "repeat run must be bit-identical");
    let data = |text: &str| {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    // shard count appears in the metadata block; the data must not move
    assert_eq!(data(&outputs[0]), data(&outputs[2]));
    assert_eq!(data(&outputs[0]), data(&outputs[3]));
}

#[test]
fn sweep_directory_mode_writes_one_slugged_file_per_curve() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("curves");
    let out = run(&[
        "sweep",
        "--spec",
        repo_path("sweeps/sop_vs_snrd_wind.sweep")
            .to_str()
            .expect("utf-8"),
        "--out",
        &format!("{}/", out_dir.display()),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .expect("out dir exists")
        .map(|e| e.expect("entry").file_name().into_string().expect("utf-8"))
        .collect();
    names.sort();
    assert_eq!(names, ["wind-21-mps.csv", "wind-30-mps.csv", "wind-40-mps.csv"]);
}

#[test]
fn sweep_single_file_gets_a_curve_column_for_multiple_curves() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_file = dir.path().join("all.csv");
    let out = run(&[
        "sweep",
        "--spec",
        repo_path("sweeps/sop_vs_snrd_wind.sweep")
            .to_str()
            .expect("utf-8"),
        "--out",
        out_file.to_str().expect("utf-8"),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&out_file).expect("file exists");
    let (header, rows) = parse_table(&text);
    assert_eq!(header[0], "curve");
    assert_eq!(header[1], "baseline_mean_snr_d_db");
    assert_eq!(rows.len(), 63);
    let labels: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        labels,
        ["wind 21 mps", "wind 30 mps", "wind 40 mps"].into()
    );
}

#[test]
fn sweep_default_output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = small_sweep_doc(dir.path());
    let out_dir = dir.path().join("from-env");
    let out = bin()
        .args(["sweep", "--spec", spec.to_str().expect("utf-8")])
        .env("OPTSEC_OUT_DIR", &out_dir)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    assert!(out_dir.join("mixed-case-label.csv").is_file());
}

#[test]
fn sweep_captures_row_failures_and_still_exits_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let scenario = scenario_arg("haps_uav.scenario");
    let spec = write_sweep_doc(
        dir.path(),
        &format!(
            r#"
schema_version = 1
sweep_variable = "zenith_angle_deg"
grid = [70.0, 95.0]
metrics = ["sop"]

[[curve]]
label = "bad point"
scenario = "{scenario}"
"#
        ),
    );
    let out_file = dir.path().join("rows.csv");
    let out = run(&[
        "sweep",
        "--spec",
        spec.to_str().expect("utf-8"),
        "--out",
        out_file.to_str().expect("utf-8"),
    ]);
    assert_eq!(exit_code(&out), 0, "row errors are data, not failures");
    let (header, rows) = parse_table(&std::fs::read_to_string(&out_file).expect("file"));
    let status = header.iter().position(|h| h == "status").expect("status column");
    let sop = header.iter().position(|h| h == "sop").expect("sop column");
    assert_eq!(rows[0][status], "ok");
    assert!(!rows[0][sop].is_empty());
    assert_ne!(rows[1][status], "ok");
    assert!(rows[1][sop].is_empty(), "failed rows carry no numbers");
    assert!(stdout_str(&out).contains("1 rows captured errors"));
}

#[test]
fn sweep_empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().expect("tempdir");
    let scenario = scenario_arg("haps_uav.scenario");
    let spec = write_sweep_doc(
        dir.path(),
        &format!(
            r#"
schema_version = 1
sweep_variable = "baseline_mean_snr_d_db"
grid = []
metrics = ["sop"]

[[curve]]
label = "empty"
scenario = "{scenario}"
"#
        ),
    );
    let out = run(&["sweep", "--spec", spec.to_str().expect("utf-8")]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8(out.stderr).expect("utf-8");
    assert!(stderr.contains("grid"), "message names the offending field: {stderr}");
}

#[test]
fn missing_inputs_and_unknown_keys_are_usage_errors() {
    let out = run(&["channel", "--scenario", "/nonexistent/x.scenario"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&["sweep", "--spec", "/nonexistent/x.sweep"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&[
        "channel",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--override",
        "not_a_field=1",
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8(out.stderr).expect("utf-8");
    assert!(stderr.contains("not_a_field"), "names the key: {stderr}");
    let out = run(&[]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn scenario_validation_error_lists_the_field_path() {
    let out = run(&[
        "channel",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--override",
        "zenith_angle_deg=95",
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8(out.stderr).expect("utf-8");
    assert!(
        stderr.contains("zenith_angle_deg"),
        "message names the field: {stderr}"
    );
}

#[test]
fn validate_passes_on_shipped_fixtures_and_trips_on_corruption() {
    for fixture in ["satellite_haps.scenario", "haps_uav.scenario"] {
        let out = run(&["validate", "--scenario", &scenario_arg(fixture)]);
        assert_eq!(exit_code(&out), 0, "{fixture}: {}", stdout_str(&out));
        let text = stdout_str(&out);
        assert!(text.contains("# seed = 0"));
        assert!(text.contains("# result: PASS (5/5 points within gate)"));
        assert!(text.contains("# worst:"));
    }
    let out = run(&[
        "validate",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--override",
        "check.beta_scale=1.1",
    ]);
    assert_eq!(exit_code(&out), 1, "deliberate mismatch must fail the gate");
    assert!(stdout_str(&out).contains("# result: FAIL"));
}

#[test]
fn validate_seed_changes_the_estimates_but_not_the_verdict() {
    let base = run(&[
        "validate",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--mc-samples",
        "100000",
        "--grid",
        "20,30",
    ]);
    let reseeded = run(&[
        "validate",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--mc-samples",
        "100000",
        "--grid",
        "20,30",
        "--seed",
        "99",
    ]);
    assert_eq!(exit_code(&base), 0);
    assert_eq!(exit_code(&reseeded), 0);
    assert_ne!(stdout_str(&base), stdout_str(&reseeded));
    let repeat = run(&[
        "validate",
        "--scenario",
        &scenario_arg("haps_uav.scenario"),
        "--mc-samples",
        "100000",
        "--grid",
        "20,30",
    ]);
    assert_eq!(stdout_str(&base), stdout_str(&repeat), "same seed, same bytes");
}
