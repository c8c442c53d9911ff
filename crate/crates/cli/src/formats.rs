//! JSON file schemas. Every file carries a `format` field with an explicit
//! schema version.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cqmac_core::channel::{from_classical, CqMac};
use cqmac_core::info::CodeDistribution;
use cqmac_core::linalg::DensityOperator;
use cqmac_core::source::JointSource;

pub const SOURCE_FORMAT: &str = "source/1";
pub const CHANNEL_FORMAT: &str = "channel/1";
pub const CODE_DIST_FORMAT: &str = "code-dist/1";

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

fn check_format(path: &str, got: &str, want: &str) -> Result<()> {
    if got != want {
        bail!("{path}: format is {got:?}, expected {want:?}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Source files
// ---------------------------------------------------------------------------

/// `{"format": "source/1", "pmf": [[...], ...]}` with row index u.
#[derive(Serialize, Deserialize)]
pub struct SourceFile {
    pub format: String,
    pub pmf: Vec<Vec<f64>>,
}

pub fn load_source(path: &str) -> Result<JointSource> {
    let file: SourceFile = read_json(path)?;
    check_format(path, &file.format, SOURCE_FORMAT)?;
    JointSource::new(file.pmf).with_context(|| format!("validating source pmf in {path}"))
}

// ---------------------------------------------------------------------------
// Channel files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct ChannelOutputEntry {
    pub x1: usize,
    pub x2: usize,
    pub rho: DensityOperator,
}

/// Either a full table of quantum outputs or classical conditional rows.
#[derive(Serialize, Deserialize)]
pub struct ChannelFile {
    pub format: String,
    #[serde(rename = "sizeX1")]
    pub size_x1: usize,
    #[serde(rename = "sizeX2")]
    pub size_x2: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(default)]
    pub classical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<ChannelOutputEntry>>,
    /// Conditional rows p(y | x1, x2), x1-major, when `classical` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_y: Option<Vec<Vec<f64>>>,
}

pub fn load_channel(path: &str) -> Result<CqMac> {
    let file: ChannelFile = read_json(path)?;
    check_format(path, &file.format, CHANNEL_FORMAT)?;
    if file.classical {
        let rows = file
            .p_y
            .with_context(|| format!("{path}: classical channel needs p_y rows"))?;
        return Ok(from_classical(&rows, file.size_x1, file.size_x2, file.dim_b)?);
    }
    let entries = file
        .outputs
        .with_context(|| format!("{path}: quantum channel needs an outputs table"))?;
    let mut table: Vec<Option<DensityOperator>> = vec![None; file.size_x1 * file.size_x2];
    for e in entries {
        if e.x1 >= file.size_x1 || e.x2 >= file.size_x2 {
            bail!("{path}: output entry ({}, {}) out of range", e.x1, e.x2);
        }
        if e.rho.dim() != file.dim_b {
            bail!(
                "{path}: output ({}, {}) has dim {}, expected {}",
                e.x1,
                e.x2,
                e.rho.dim(),
                file.dim_b
            );
        }
        table[e.x1 * file.size_x2 + e.x2] = Some(e.rho);
    }
    let outputs: Vec<DensityOperator> = table
        .into_iter()
        .enumerate()
        .map(|(i, o)| {
            o.with_context(|| {
                format!(
                    "{path}: missing output for (x1={}, x2={})",
                    i / file.size_x2,
                    i % file.size_x2
                )
            })
        })
        .collect::<Result<_>>()?;
    Ok(CqMac::new(file.size_x1, file.size_x2, outputs)?)
}

// ---------------------------------------------------------------------------
// Code distribution files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct CodeDistFile {
    pub format: String,
    #[serde(flatten)]
    pub cd: CodeDistribution,
}

pub fn load_code_dist(path: &str) -> Result<CodeDistribution> {
    let file: CodeDistFile = read_json(path)?;
    check_format(path, &file.format, CODE_DIST_FORMAT)?;
    Ok(file.cd)
}

pub fn write_json<T: Serialize>(path: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {path}"))
}
