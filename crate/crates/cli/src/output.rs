//! Table writers for sweep results. CSV and JSON encode the same cells;
//! CSV prefixes a `# key = value` metadata block, JSON nests the same keys
//! under `"metadata"`.

use crate::{convention_name, formula_name, Failure, TableFormat};
use optsec_core::scenario::{scenario_to_toml, LinkScenario, Metric, SweepRow, SweepSpec};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Floats are printed with 17 significant digits so parsing the text back
/// recovers the exact bit pattern.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn scenario_sha256(s: &LinkScenario) -> Result<String, Failure> {
    let canonical = scenario_to_toml(s)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// File stem for a curve label: lowercase, runs of non-alphanumerics
/// collapsed to single hyphens.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_matches('-');
    if trimmed.is_empty() {
        "curve".to_string()
    } else {
        trimmed.to_string()
    }
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Sop => "sop",
        Metric::Ppsc => "ppsc",
    }
}

pub struct CurveOutput<'a> {
    pub label: &'a str,
    pub spec: &'a SweepSpec,
    pub rows: &'a [SweepRow],
}

/// Metadata keys shared by the CSV comment block and the JSON object, in
/// emission order.
fn metadata_pairs(curve: &CurveOutput) -> Result<Vec<(&'static str, String)>, Failure> {
    let spec = curve.spec;
    let metrics = spec
        .metrics
        .iter()
        .map(|&m| metric_name(m))
        .collect::<Vec<_>>()
        .join(",");
    let mut pairs = vec![
        ("schema_version", "1".to_string()),
        ("curve", curve.label.to_string()),
        ("scenario", spec.scenario.name.clone()),
        ("scenario_sha256", scenario_sha256(&spec.scenario)?),
        ("sweep_variable", spec.variable.key().to_string()),
        ("metrics", metrics),
        ("secrecy_rate", fmt_float(spec.secrecy_rate)),
        (
            "threshold_convention",
            convention_name(spec.convention).to_string(),
        ),
        ("sop_formula", formula_name(spec.formula).to_string()),
        ("series_rel_tolerance", fmt_float(spec.series.rel_tolerance)),
        ("series_max_terms", spec.series.max_terms.to_string()),
    ];
    if let Some(mc) = spec.mc {
        pairs.push(("mc_seed", mc.seed.to_string()));
        pairs.push(("mc_samples", mc.samples.to_string()));
        pairs.push(("mc_shards", mc.shards.to_string()));
    }
    Ok(pairs)
}

enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

fn column_names(variable_key: &str, with_curve: bool) -> Vec<&str> {
    let mut cols = Vec::with_capacity(18);
    if with_curve {
        cols.push("curve");
    }
    cols.extend([
        variable_key,
        "rytov_variance",
        "scintillation_index",
        "alpha",
        "beta",
        "eta",
        "transmittance",
        "effective_mean_snr_d_db",
        "effective_mean_snr_e_db",
        "sop",
        "sop_raw",
        "sop_outer_terms",
        "ppsc",
        "mc_sop",
        "mc_sop_std_error",
        "mc_ppsc",
        "mc_ppsc_std_error",
        "status",
    ]);
    cols
}

/// Failed rows keep their grid value and status; every derived cell is
/// absent rather than a placeholder number.
fn row_cells(row: &SweepRow, label: Option<&str>) -> Vec<Cell> {
    let failed = row.error.is_some();
    let num = |v: f64| if failed { Cell::Missing } else { Cell::Float(v) };
    let opt = |v: Option<f64>| match v {
        Some(x) if !failed => Cell::Float(x),
        _ => Cell::Missing,
    };
    let mut cells = Vec::with_capacity(18);
    if let Some(label) = label {
        cells.push(Cell::Text(label.to_string()));
    }
    cells.push(Cell::Float(row.grid_value));
    cells.push(num(row.rytov_variance));
    cells.push(num(row.scintillation_index));
    cells.push(num(row.alpha));
    cells.push(num(row.beta));
    cells.push(num(row.eta));
    cells.push(num(row.transmittance));
    cells.push(num(row.effective_mean_snr_d_db));
    cells.push(num(row.effective_mean_snr_e_db));
    cells.push(opt(row.sop));
    cells.push(opt(row.sop_raw));
    cells.push(match row.sop_outer_terms {
        Some(n) if !failed => Cell::Int(n as u64),
        _ => Cell::Missing,
    });
    cells.push(opt(row.ppsc));
    cells.push(opt(row.mc_sop.map(|e| e.value)));
    cells.push(opt(row.mc_sop.map(|e| e.std_error)));
    cells.push(opt(row.mc_ppsc.map(|e| e.value)));
    cells.push(opt(row.mc_ppsc.map(|e| e.std_error)));
    cells.push(Cell::Text(match &row.error {
        None => "ok".to_string(),
        Some(msg) => msg.clone(),
    }));
    cells
}

fn render_csv(curves: &[CurveOutput], with_curve: bool) -> Result<String, Failure> {
    let mut buf = Vec::new();
    for curve in curves {
        for (k, v) in metadata_pairs(curve)? {
            writeln!(buf, "# {k} = {v}").map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    let variable_key = curves[0].spec.variable.key();
    let mut wtr = csv::Writer::from_writer(&mut buf);
    let io = |e: csv::Error| Failure::Io(e.to_string());
    wtr.write_record(column_names(variable_key, with_curve))
        .map_err(io)?;
    for curve in curves {
        let label = with_curve.then_some(curve.label);
        for row in curve.rows {
            let record: Vec<String> = row_cells(row, label).iter().map(Cell::csv).collect();
            wtr.write_record(&record).map_err(io)?;
        }
    }
    wtr.flush().map_err(|e| Failure::Io(e.to_string()))?;
    drop(wtr);
    String::from_utf8(buf).map_err(|e| Failure::Io(e.to_string()))
}

fn curve_json(curve: &CurveOutput, with_curve: bool) -> Result<serde_json::Value, Failure> {
    let metadata: serde_json::Map<String, serde_json::Value> = metadata_pairs(curve)?
        .into_iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::from(v)))
        .collect();
    let columns = column_names(curve.spec.variable.key(), with_curve);
    let label = with_curve.then_some(curve.label);
    let rows: Vec<serde_json::Value> = curve
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, serde_json::Value> = columns
                .iter()
                .zip(row_cells(row, label))
                .map(|(&name, cell)| (name.to_string(), cell.json()))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    Ok(serde_json::json!({ "metadata": metadata, "rows": rows }))
}

fn render_json(curves: &[CurveOutput], with_curve: bool) -> Result<String, Failure> {
    let value = if with_curve {
        let parts = curves
            .iter()
            .map(|c| curve_json(c, true))
            .collect::<Result<Vec<_>, _>>()?;
        serde_json::json!({ "curves": parts })
    } else {
        curve_json(&curves[0], false)?
    };
    serde_json::to_string_pretty(&value).map_err(|e| Failure::Io(e.to_string()))
}

fn extension(format: TableFormat) -> &'static str {
    match format {
        TableFormat::Csv => "csv",
        TableFormat::Json => "json",
    }
}

enum Target {
    Directory(PathBuf),
    File(PathBuf),
}

fn resolve_target(out: Option<&Path>) -> Target {
    match out {
        Some(p) => {
            let wants_dir = p.is_dir() || p.to_string_lossy().ends_with('/');
            if wants_dir {
                Target::Directory(p.to_path_buf())
            } else {
                Target::File(p.to_path_buf())
            }
        }
        None => {
            let dir = std::env::var_os("OPTSEC_OUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            Target::Directory(dir)
        }
    }
}

fn write_file(path: &Path, content: &str, rows: usize) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::io(&format!("writing {}", path.display()), e))?;
    println!("wrote {} ({rows} rows)", path.display());
    Ok(())
}

/// One file per curve under a directory target, or a single file whose rows
/// carry a `curve` column when several curves share it.
pub fn write_sweep_outputs(
    curves: &[CurveOutput],
    out: Option<&Path>,
    format: TableFormat,
) -> Result<(), Failure> {
    match resolve_target(out) {
        Target::Directory(dir) => {
            std::fs::create_dir_all(&dir)
                .map_err(|e| Failure::io(&format!("creating {}", dir.display()), e))?;
            for curve in curves {
                let path = dir.join(format!("{}.{}", slug(curve.label), extension(format)));
                let content = match format {
                    TableFormat::Csv => render_csv(std::slice::from_ref(curve), false)?,
                    TableFormat::Json => render_json(std::slice::from_ref(curve), false)?,
                };
                write_file(&path, &content, curve.rows.len())?;
            }
        }
        Target::File(path) => {
            let with_curve = curves.len() > 1;
            let content = match format {
                TableFormat::Csv => render_csv(curves, with_curve)?,
                TableFormat::Json => render_json(curves, with_curve)?,
            };
            let rows = curves.iter().map(|c| c.rows.len()).sum();
            write_file(&path, &content, rows)?;
        }
    }
    let captured: usize = curves
        .iter()
        .flat_map(|c| c.rows.iter())
        .filter(|r| r.error.is_some())
        .count();
    if captured > 0 {
        println!("{captured} rows captured errors (see status column)");
    }
    Ok(())
}
