use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use cheshire_core::cheshire::{cheshire_parameter, noise_check, DEFAULT_NOISE_MARGIN};
use cheshire_core::oracle::{oracle_check, DEFAULT_SPACING};
use cheshire_core::sampler::{estimate_cheshire, sample_trials, write_trials_csv};
use cheshire_core::statistics::{joint_density, limit_moments, moments, LimitInput, LimitRegime};
use cheshire_core::{Error as CoreError, Experiment};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{set_path, ExperimentConfig, Format};
use crate::error::CliError;

pub const NO_POSTSELECTION_NOTE: &str = "no post-selection => no Cheshire cat";
pub const BLOCK_DIAGONAL_NOTE: &str = "path-block-diagonal preparation => no Cheshire cat";
pub const ORTHOGONAL_NOTE: &str = "preparation and post-selection are orthogonal; weak values are undefined, use the matrix-element limit";

fn limits(exp: &Experiment) -> Vec<Value> {
    let wv = exp.weak_values().ok();
    let me = exp.matrix_elements();
    LimitRegime::ALL
        .iter()
        .filter_map(|&regime| {
            let r = match (regime, &wv, &me) {
                (LimitRegime::AlmostOrthogonal, _, Some(me)) => {
                    limit_moments(regime, LimitInput::MatrixElements(me), exp.w_x(), exp.w_y())
                }
                (LimitRegime::AlmostOrthogonal, _, None) => return None,
                (_, Some(wv), _) => limit_moments(regime, LimitInput::WeakValues(wv), exp.w_x(), exp.w_y()),
                (_, None, _) => return None,
            };
            Some(match r {
                Ok(l) => serde_json::to_value(l).expect("limit serializes"),
                Err(e) => json!({ "regime": regime, "error": e.to_string() }),
            })
        })
        .collect()
}

pub fn analyze(cfg: &ExperimentConfig) -> Result<Value> {
    let exp = cfg.experiment()?;
    let (nu_x, nu_y) = cfg.noise();
    let (rx, ry) = exp.regimes();
    let rep = cheshire_parameter(&exp);
    let (rep, noise) = rep.with_noise(nu_x, nu_y, DEFAULT_NOISE_MARGIN)?;
    let mut notes = Vec::new();
    if exp.effect().is_scalar(1e-12) {
        notes.push(NO_POSTSELECTION_NOTE);
    }
    if exp.rho_i().is_path_block_diagonal(1e-12) {
        notes.push(BLOCK_DIAGONAL_NOTE);
    }
    if exp.normalization().is_none() {
        notes.push(ORTHOGONAL_NOTE);
    }
    Ok(json!({
        "config": cfg,
        "regimes": { "x": rx, "y": ry },
        "w_x": exp.w_x(),
        "w_y": exp.w_y(),
        "weak_values": exp.weak_values().ok(),
        "matrix_elements": exp.matrix_elements(),
        "normalization": exp.normalization(),
        "p_postselect": exp.p_postselect(),
        "moments": moments(&exp),
        "limits": limits(&exp),
        "cheshire": rep,
        "noise_check": noise,
        "notes": notes,
    }))
}

/// Conditional density on an `n × n` grid covering all mixture centres.
pub fn write_density_csv(exp: &Experiment, n: usize, path: &Path) -> Result<()> {
    let n = n.max(2);
    let (sx, sy) = (4.0 / exp.meter_x().epsilon(), 4.0 / exp.meter_y().epsilon());
    let (x0, x1, y0, y1) = (-sx, 1.0 + sx, -1.0 - sy, 1.0 + sy);
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["x", "y", "density"])?;
    for i in 0..n {
        let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let y = y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
            w.write_record([x.to_string(), y.to_string(), joint_density(exp, x, y).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn sample(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Value> {
    let exp = cfg.experiment()?;
    let scfg = cfg.sampler()?;
    let run = sample_trials(&exp, &scfg)?;
    if let Some(dir) = out {
        let path = dir.join("trials.csv");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_trials_csv(&run.records, BufWriter::new(file))?;
    }
    let est = estimate_cheshire(&run.records)?;
    let rep = cheshire_parameter(&exp);
    let (nu_x, nu_y) = cfg.noise();
    let noise = noise_check(&rep, nu_x, nu_y, rep.w_x, rep.w_y, DEFAULT_NOISE_MARGIN)?;
    let successes = run.records.iter().filter(|r| r.postselected).count();
    Ok(json!({
        "config": cfg,
        "estimate": est.estimate,
        "std_error": est.std_error,
        "n": est.n,
        "c_closed_form": rep.c_total,
        "c_max": rep.c_max(),
        "p_postselect": exp.p_postselect(),
        "success_fraction": successes as f64 / run.records.len() as f64,
        "metadata": run.metadata,
        "noise_check": noise,
    }))
}

pub fn oracle(cfg: &ExperimentConfig) -> Result<(Value, Option<CliError>)> {
    let exp = cfg.experiment()?;
    let spacing = cfg.output().oracle_spacing.unwrap_or(DEFAULT_SPACING);
    let chk = oracle_check(&exp, spacing).map_err(|e| match e {
        CoreError::IncommensurateGrid { .. } | CoreError::InsufficientCoverage { .. } => {
            anyhow::Error::new(CliError::Config(format!("output.oracle_spacing: {e}")))
        }
        CoreError::InvalidArgument(msg) => anyhow::Error::new(CliError::Config(format!("oracle grid: {msg}"))),
        other => other.into(),
    })?;
    let report = json!({
        "config": cfg,
        "spacing": spacing,
        "check": chk,
    });
    let failure = (!chk.passed).then_some(CliError::OracleMismatch { residual: chk.max_residual, tolerance: chk.tolerance });
    Ok((report, failure))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub w_x: Option<f64>,
    pub w_y: Option<f64>,
    pub p_postselect: Option<f64>,
    pub mean_x: Option<f64>,
    pub mean_y: Option<f64>,
    pub cross_xy: Option<f64>,
    pub c_total: Option<f64>,
    pub c_max: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn failed(value: f64, status: String) -> Self {
        Self {
            value,
            w_x: None,
            w_y: None,
            p_postselect: None,
            mean_x: None,
            mean_y: None,
            cross_xy: None,
            c_total: None,
            c_max: None,
            status,
        }
    }
}

/// One row per value; every path in `params` is set to that value.
pub fn sweep(text: &str, params: &[String], values: &[f64]) -> Result<Vec<SweepRow>> {
    let base: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    ExperimentConfig::from_table(base.clone())?;
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut doc = base.clone();
        for p in params {
            set_path(&mut doc, p, v)?;
        }
        let exp = match ExperimentConfig::from_table(doc).and_then(|c| c.experiment()) {
            Ok(e) => e,
            Err(e) => {
                rows.push(SweepRow::failed(v, e.to_string()));
                continue;
            }
        };
        let m = moments(&exp);
        let rep = cheshire_parameter(&exp);
        rows.push(SweepRow {
            value: v,
            w_x: Some(exp.w_x()),
            w_y: Some(exp.w_y()),
            p_postselect: Some(exp.p_postselect()),
            mean_x: Some(m.mean_x),
            mean_y: Some(m.mean_y),
            cross_xy: Some(m.cross_xy),
            c_total: Some(rep.c_total),
            c_max: Some(rep.c_max()),
            status: "ok".into(),
        });
    }
    Ok(rows)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn render_report(report: &Value, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(report)?),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            Ok(w.into_inner()?)
        }
    }
}

pub fn render_rows(rows: &[SweepRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(rows)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            Ok(w.into_inner()?)
        }
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes `<out>/<name>.<ext>` or, without an output directory, stdout.
pub fn emit(bytes: &[u8], name: &str, format: Format, out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            let path = dir.join(format!("{name}.{}", extension(format)));
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

pub fn emit_report(report: &Value, name: &str, format: Format, out: Option<&Path>) -> Result<()> {
    emit(&render_report(report, format)?, name, format, out)
}
