//! CSV and JSON writers for metric results.
//!
//! Every CSV starts with `# key=value` lines recording the dataset and the
//! parameters used, followed by a header row.

use std::fmt::Write as _;

use serde::Serialize;

use super::cdm::CdmMatrix;
use super::level::{LevelCurve, LevelMetric};

pub type Provenance = Vec<(String, String)>;

fn header_lines(provenance: &[(String, String)]) -> String {
    let mut out = String::new();
    for (key, value) in provenance {
        let _ = writeln!(out, "# {key}={value}");
    }
    out
}

pub fn level_curve_csv(curve: &LevelCurve, provenance: &[(String, String)]) -> String {
    let mut out = header_lines(provenance);
    let _ = writeln!(out, "# rms={}", curve.rms);
    let _ = writeln!(out, "# sequences={}", curve.sequence_count);
    let column = match curve.metric {
        LevelMetric::Lcr => "crossings_per_s",
        LevelMetric::Afd => "fade_duration_s",
    };
    let _ = writeln!(out, "level_db,threshold,{column}");
    for ((db, t), v) in curve.levels_db.iter().zip(&curve.thresholds).zip(&curve.values) {
        let _ = writeln!(out, "{db},{t},{v}");
    }
    out
}

/// Indexed vector, e.g. autocorrelation lags or cepstral coefficients.
pub fn vector_csv(index_name: &str, value_name: &str, values: &[f64], provenance: &[(String, String)]) -> String {
    let mut out = header_lines(provenance);
    let _ = writeln!(out, "{index_name},{value_name}");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

#[derive(Serialize)]
struct CdmReport<'a> {
    #[serde(flatten)]
    matrix: &'a CdmMatrix,
    parameters: serde_json::Map<String, serde_json::Value>,
}

pub fn cdm_json(matrix: &CdmMatrix, provenance: &[(String, String)]) -> String {
    let parameters = provenance
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    serde_json::to_string_pretty(&CdmReport { matrix, parameters }).expect("CDM matrices serialize")
}
