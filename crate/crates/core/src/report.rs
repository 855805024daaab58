//! Machine-readable run reports and file emission.
//!
//! Reports serialize deterministically (fixed field order, shortest
//! round-trip floats): identical configs reproduce identical JSON except for
//! the `timing` block.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{QcurvError, Result};
use crate::gjms::CoercivityReport;
use crate::obstruction::KwReport;
use crate::solver::{BlowupDiagnostics, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct Fingerprint {
    pub tool: String,
    pub version: String,
    pub config: crate::config::ScenarioConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct QRow {
    pub q: f64,
    pub mu_q: f64,
    pub sup_norm: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub u_coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSummary {
    /// Scale of the reported values (energy-functional scale).
    pub scale: String,
    pub min_value: f64,
    pub argmin_t: f64,
    pub mu_f_scale_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub fingerprint: Fingerprint,
    pub verdict: Verdict,
    pub per_q: Vec<QRow>,
    /// max |Q - f| / max f of the rescaled conformal metric (converged runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_defect: Option<f64>,
    pub threshold: ThresholdSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<BlowupDiagnostics>,
    pub kw: KwReport,
    pub coercivity: CoercivityReport,
    pub aliasing_residual: f64,
    pub timing: Timing,
}

/// Curve samples at uniform polar angles.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub q_curvature: Vec<f64>,
}

pub fn report_json(report: &RunReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

fn write_file(path: &str, content: &str) -> Result<()> {
    let p = Path::new(path);
    if let Some(dir) = p.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| QcurvError::Io {
                path: path.to_string(),
                source: e,
            })?;
        }
    }
    fs::write(p, content).map_err(|e| QcurvError::Io {
        path: path.to_string(),
        source: e,
    })
}

pub fn table_csv(report: &RunReport) -> String {
    let mut out = String::from("q,mu_q,sup_norm,residual,iters\n");
    for row in &report.per_q {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.q, row.mu_q, row.sup_norm, row.residual, row.iterations
        ));
    }
    out
}

pub fn curves_csv(curves: &CurveData) -> String {
    let mut out = String::from("theta,t,u,q_curvature\n");
    for i in 0..curves.theta.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            curves.theta[i], curves.t[i], curves.u[i], curves.q_curvature[i]
        ));
    }
    out
}

/// Write the full report triple. Content is rendered before any file is
/// created, so a failed run leaves no partial outputs.
pub fn emit_reports(
    report: &RunReport,
    curves: &CurveData,
    report_path: Option<&str>,
    table_path: Option<&str>,
    curves_path: Option<&str>,
) -> Result<()> {
    let json = report_json(report)?;
    let table = table_csv(report);
    let curve_text = curves_csv(curves);
    if let Some(p) = report_path {
        write_file(p, &json)?;
    }
    if let Some(p) = table_path {
        write_file(p, &table)?;
    }
    if let Some(p) = curves_path {
        write_file(p, &curve_text)?;
    }
    Ok(())
}

/// Drop the timing block and re-serialize canonically; used for golden
/// comparisons.
pub fn canonical_without_timing(json_text: &str) -> Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(json_text)?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timing");
    }
    Ok(serde_json::to_string_pretty(&value)?)
}
