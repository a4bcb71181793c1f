//! Executes a config: resource check, (parallel) sweep points, files, manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::estimate::{check_resources, ResourceEstimate};
use crate::experiments::{run_point, RunOutput};
use crate::output::{sweep_table, write_atomic, write_json, write_series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub wall_time_s: f64,
    pub threads: usize,
    pub resources: ResourceEstimate,
    pub status: RunStatus,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub failures: Vec<PointFailure>,
}

impl RunManifest {
    /// 0 on success, otherwise the code of the first failing point.
    pub fn exit_code(&self) -> i32 {
        self.failures.first().map_or(0, |f| f.exit_code)
    }
}

/// Sweep points in ascending order of the swept value.
fn sorted_points(cfg: &ExperimentConfig) -> Vec<Option<f64>> {
    let mut points = cfg.points();
    points.sort_by(|a, b| a.unwrap_or(0.0).total_cmp(&b.unwrap_or(0.0)));
    points
}

fn compute(cfg: &ExperimentConfig, point: Option<f64>) -> CliResult<RunOutput> {
    let params = cfg.params_at(point)?;
    let start = Instant::now();
    let out = run_point(&params, &cfg.grid, cfg.kink_factor);
    match (&cfg.sweep, point) {
        (Some(s), Some(v)) => log::info!("{} = {v} done in {:.2} s", s.param_name, start.elapsed().as_secs_f64()),
        _ => log::info!("{} done in {:.2} s", cfg.experiment.name(), start.elapsed().as_secs_f64()),
    }
    out
}

/// Runs every point on a pool of `cfg.threads()` workers and writes all
/// outputs under `cfg.output_dir`. Point failures are recorded in the
/// manifest; only config, resource and i/o problems abort early.
pub fn run(cfg: &ExperimentConfig) -> CliResult<RunManifest> {
    let start = Instant::now();
    cfg.validate()?;
    let resources = check_resources(cfg)?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let points = sorted_points(cfg);
    let threads = cfg.threads();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let results: Vec<CliResult<RunOutput>> =
        pool.install(|| points.par_iter().map(|&p| compute(cfg, p)).collect());

    let sweeping = cfg.sweep.is_some();
    let mut outputs = Vec::new();
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    let mut summaries: Vec<(f64, Option<Value>)> = Vec::new();
    for (index, (point, result)) in points.iter().zip(results).enumerate() {
        let sub = if sweeping { format!("point_{index:03}") } else { String::new() };
        let label = match (&cfg.sweep, point) {
            (Some(s), Some(v)) => format!("{sub} ({} = {v})", s.param_name),
            _ => String::new(),
        };
        match result {
            Ok(out) => {
                let point_dir = dir.join(&sub);
                fs::create_dir_all(&point_dir).map_err(|e| CliError::io(&point_dir, e))?;
                let mut summary = out.summary.clone();
                if let (Value::Object(map), Some(s), Some(v)) = (&mut summary, &cfg.sweep, point) {
                    map.insert("sweep".into(), json!({"param_name": s.param_name, "value": v}));
                }
                outputs.extend(write_point(&dir, &sub, &out, &summary)?);
                for w in &out.series.warnings {
                    warnings.push(if label.is_empty() { w.clone() } else { format!("{label}: {w}") });
                }
                summaries.push((point.unwrap_or(f64::NAN), Some(summary)));
            }
            Err(e) => {
                log::error!("point {index} failed: {e}");
                failures.push(PointFailure {
                    index,
                    sweep_value: *point,
                    error: if label.is_empty() { e.to_string() } else { format!("{label}: {e}") },
                    exit_code: e.exit_code(),
                });
                summaries.push((point.unwrap_or(f64::NAN), None));
            }
        }
    }

    if let Some(sweep) = &cfg.sweep {
        let rows: Vec<(f64, Option<&Value>)> = summaries.iter().map(|(v, s)| (*v, s.as_ref())).collect();
        write_atomic(&dir.join("sweep.csv"), sweep_table(&sweep.param_name, &rows).as_bytes())?;
        outputs.push("sweep.csv".to_string());
        let listing: Vec<Value> = summaries.iter().map(|(v, s)| json!({"value": v, "summary": s})).collect();
        write_json(&dir.join("sweep_summary.json"), &listing)?;
        outputs.push("sweep_summary.json".to_string());
    }

    let manifest = RunManifest {
        config: cfg.clone(),
        library_version: qdyn_core::VERSION.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads,
        resources,
        status: if failures.is_empty() { RunStatus::Ok } else { RunStatus::Failed },
        outputs,
        warnings,
        failures,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn rel(sub: &str, name: &str) -> String {
    if sub.is_empty() {
        name.to_string()
    } else {
        format!("{sub}/{name}")
    }
}

fn write_point(root: &Path, sub: &str, out: &RunOutput, summary: &Value) -> CliResult<Vec<String>> {
    let dir: PathBuf = root.join(sub);
    let mut written = Vec::new();
    write_series(&dir.join("series.csv"), &out.series)?;
    written.push(rel(sub, "series.csv"));
    write_json(&dir.join("summary.json"), summary)?;
    written.push(rel(sub, "summary.json"));
    for (name, doc) in &out.extra {
        write_json(&dir.join(name), doc)?;
        written.push(rel(sub, name));
    }
    Ok(written)
}
