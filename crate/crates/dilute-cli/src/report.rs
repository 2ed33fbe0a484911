//! Report records and their JSON / CSV / text renderings.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

/// Residual assigned to a check whose computation errored.
pub const FAILED_RESIDUAL: f64 = f64::MAX;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn new(check: &str, params: BTreeMap<String, Value>, residual: f64, tolerance: f64, wall_time: f64) -> Self {
        // NaN and infinities are reported as failures with a finite residual
        let residual = if residual.is_finite() { residual.abs() } else { FAILED_RESIDUAL };
        Self { check: check.to_string(), params, pass: residual <= tolerance, residual, tolerance, wall_time }
    }
}

/// Builder for the `params` object.
#[derive(Clone, Default)]
pub struct Params(pub BTreeMap<String, Value>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, k: &str, v: impl Serialize) -> Self {
        self.0.insert(k.to_string(), json!(v));
        self
    }
}

/// Times `f` and turns its outcome into one report line.
pub fn measure(
    cfg: &RunConfig,
    check: &str,
    tolerance: f64,
    params: Params,
    f: impl FnOnce() -> dilute::Result<f64>,
) -> VerificationReport {
    let tol = cfg.tolerance(check, tolerance);
    let start = Instant::now();
    let out = f();
    let t = start.elapsed().as_secs_f64();
    match out {
        Ok(r) => VerificationReport::new(check, params.0, r, tol, t),
        Err(e) => VerificationReport::new(check, params.with("error", e.to_string()).0, FAILED_RESIDUAL, tol, t),
    }
}

#[derive(Serialize)]
struct Document<'a> {
    header: Value,
    results: &'a [VerificationReport],
}

pub fn header(cfg: &RunConfig) -> Value {
    json!({
        "config": cfg,
        "versions": { "dilute": dilute::VERSION, "dilute-cli": env!("CARGO_PKG_VERSION") },
    })
}

pub fn render(cfg: &RunConfig, results: &[VerificationReport], format: Format) -> String {
    match format {
        Format::Json => {
            let doc = Document { header: header(cfg), results };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["check", "params", "residual", "tolerance", "pass", "wall_time"]).expect("in-memory write");
            for r in results {
                w.write_record([
                    r.check.clone(),
                    serde_json::to_string(&r.params).expect("params serialise"),
                    format!("{:e}", r.residual),
                    format!("{:e}", r.tolerance),
                    r.pass.to_string(),
                    format!("{:.6}", r.wall_time),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        Format::Text => {
            let mut s = String::new();
            for r in results {
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s.push_str(&format!(
                    "{} {:<28} residual={:.3e} tol={:.1e} {}\n",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.check,
                    r.residual,
                    r.tolerance,
                    params.join(" ")
                ));
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            s.push_str(&format!("{} checks, {} passed, {} failed\n", results.len(), results.len() - failed, failed));
            s
        }
    }
}

/// The JSON document with every `wall_time` zeroed; equal for equal
/// (config, seed).
pub fn canonical_json(cfg: &RunConfig, results: &[VerificationReport]) -> String {
    let zeroed: Vec<VerificationReport> =
        results.iter().cloned().map(|r| VerificationReport { wall_time: 0.0, ..r }).collect();
    render(cfg, &zeroed, Format::Json)
}
