//! Machine-readable outputs: the diagram as JSON or CSV, and run manifests.

use std::fmt::Write as _;

use cldmap_core::{AverageCld, DirectionTable, DirectionalDefectField, LocalField, QMean};
use serde::Serialize;

use crate::generate::Scene;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct DirectionRecord {
    pub k: usize,
    pub theta_rad: f64,
    pub mean_length: Option<f64>,
    pub cardinality: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CldExport {
    pub schema: u32,
    pub height: usize,
    pub width: usize,
    pub global_mean: f64,
    pub tau: f64,
    pub directions: usize,
    pub normalization: String,
    pub r_max: usize,
    pub r_max_cap: Option<usize>,
    pub anisotropy: Option<f64>,
    pub defined_pixel_fraction: f64,
    pub q_mean: f64,
    pub q_mean_mode: &'static str,
    pub q_defined_pixels: usize,
    pub cld: Vec<DirectionRecord>,
}

pub fn q_mean_label(mode: QMean) -> &'static str {
    match mode {
        QMean::DefinedPixels => "defined-pixels",
        QMean::AllPixels => "all-pixels",
    }
}

impl CldExport {
    pub fn new(field: &LocalField, avg: &AverageCld, ddmap: &DirectionalDefectField, global_mean: f64) -> Self {
        let config = field.config();
        let table = DirectionTable::new(config.directions, 1).expect("validated direction count");
        let (height, width) = field.dimensions();
        let cld = (1..=avg.directions())
            .map(|k| DirectionRecord {
                k,
                theta_rad: table.angle(k),
                mean_length: avg.mean(k),
                cardinality: avg.cardinality(k),
            })
            .collect();
        Self {
            schema: SCHEMA,
            height,
            width,
            global_mean,
            tau: config.tau.value(),
            directions: config.directions,
            normalization: config.normalization.to_string(),
            r_max: field.r_max(),
            r_max_cap: config.r_max_cap,
            anisotropy: avg.anisotropy(),
            defined_pixel_fraction: ddmap.defined_count() as f64 / (height * width) as f64,
            q_mean: ddmap.mean_q(),
            q_mean_mode: q_mean_label(ddmap.q_mean_mode()),
            q_defined_pixels: ddmap.defined_count(),
            cld,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// Columns `k,theta_rad,mean_length,cardinality`, preceded by one `#`
    /// metadata line. Missing means are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# schema={} tau={} n_d={} normalization={} r_max={} r_max_cap={}",
            self.schema,
            self.tau,
            self.directions,
            self.normalization,
            self.r_max,
            self.r_max_cap.map_or_else(|| "none".to_string(), |v| v.to_string())
        );
        out.push_str("k,theta_rad,mean_length,cardinality\n");
        for rec in &self.cld {
            let mean = rec.mean_length.map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", rec.k, rec.theta_rad, mean, rec.cardinality);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Parameters {
    pub tau: f64,
    pub tau_prime: f64,
    pub tau_second: f64,
    pub directions: usize,
    pub normalization: String,
    pub r_max_cap: Option<usize>,
    pub r_max: usize,
    pub literal_q_mean: bool,
    pub format: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorRecord {
    #[serde(flatten)]
    pub scene: Scene,
    pub height: usize,
    pub width: usize,
    pub sha256: String,
}

/// Everything needed to reproduce an output set.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            schema: SCHEMA,
            tool: "cldmap",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input: None,
            generator: None,
            parameters: None,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
