use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CellConfig;
use crate::kv::{KeyValues, KvError};

pub const CSV_HEADER: &str = "voltage_V,current_A";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvPoint {
    pub voltage: f64,
    pub current: f64,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line 1: expected header `{CSV_HEADER}`, found `{found}`")]
    MissingHeader { found: String },
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("dataset has {0} points; at least 2 are required")]
    TooFewPoints(usize),
    #[error("metadata {path}: {message}")]
    Meta { path: PathBuf, message: String },
}

/// Measured I-V curve of one device at one operating condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvDataset {
    pub name: String,
    pub cell: CellConfig,
    points: Vec<IvPoint>,
}

impl PvDataset {
    pub fn new(
        name: impl Into<String>,
        cell: CellConfig,
        points: Vec<IvPoint>,
    ) -> Result<Self, DatasetError> {
        if points.len() < 2 {
            return Err(DatasetError::TooFewPoints(points.len()));
        }
        if let Some(i) = points
            .iter()
            .position(|p| !p.voltage.is_finite() || !p.current.is_finite())
        {
            return Err(DatasetError::BadRow {
                line: i + 2,
                message: "non-finite value".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            cell,
            points,
        })
    }

    /// Reads `<path>` and its `<path-without-extension>.meta` sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let text = read(path)?;
        let points = parse_csv(&text)?;
        let meta_path = meta_path(path);
        let meta_text = read(&meta_path)?;
        let (name, cell) = parse_meta(&meta_text).map_err(|message| DatasetError::Meta {
            path: meta_path.clone(),
            message,
        })?;
        Self::new(name, cell, points)
    }

    pub fn points(&self) -> &[IvPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn voltage_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.voltage), hi.max(p.voltage))
            })
    }
}

pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses the two-column CSV body, keeping row order.
pub fn parse_csv(text: &str) -> Result<Vec<IvPoint>, DatasetError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != CSV_HEADER {
        return Err(DatasetError::MissingHeader {
            found: header.to_string(),
        });
    }
    let mut points = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let (Some(v), Some(i), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(DatasetError::BadRow {
                line,
                message: format!("expected 2 fields, found `{row}`"),
            });
        };
        let number = |s: &str, what: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| DatasetError::BadRow {
                    line,
                    message: format!("{what} `{}` is not a finite number", s.trim()),
                })
        };
        points.push(IvPoint {
            voltage: number(v, "voltage")?,
            current: number(i, "current")?,
        });
    }
    Ok(points)
}

fn parse_meta(text: &str) -> Result<(String, CellConfig), String> {
    let kv = KeyValues::parse(text).map_err(|e: KvError| e.to_string())?;
    let need = |key: &str| kv.get(key).ok_or_else(|| format!("missing key `{key}`"));
    let number = |key: &str, s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{key}` is not a number: `{s}`"))
    };
    let name = need("name")?.to_string();
    let temperature = number("temperature_C", need("temperature_C")?)?;
    let series_cells: u32 = need("series_cells")?
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or("`series_cells` must be a positive integer")?;
    let irradiance = kv
        .get("irradiance_Wm2")
        .map(|s| number("irradiance_Wm2", s))
        .transpose()?;
    let cell = CellConfig::from_celsius(temperature, series_cells, irradiance);
    if !(cell.temperature_kelvin > 0.0) {
        return Err("temperature is below absolute zero".into());
    }
    Ok((name, cell))
}
