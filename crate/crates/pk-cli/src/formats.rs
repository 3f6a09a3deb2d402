//! On-disk formats for derived artifacts.
//!
//! Every artifact is a JSON metadata file plus CSV payloads sharing a
//! filename prefix:
//!
//! * bin model: `{prefix}.model.json`
//! * representation: `{prefix}.rep.json`, `{prefix}.rep.csv` (dense),
//!   `{prefix}.rep.sparse.csv` (`row,col,value` triplets — the reload source)
//! * gram matrix: `{prefix}.gram.json`, `{prefix}.gram.csv` (headerless rows)
//!
//! Floats print in shortest round-trip form, so a write-read cycle is
//! bit-exact.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use pk_core::{BinModel, FallbackLevel, GramMatrix, Representation};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// `{prefix}{suffix}` without treating `suffix` as an extension swap.
pub fn artifact_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = OsString::from(prefix.as_os_str());
    name.push(suffix);
    PathBuf::from(name)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(CliError::from)
}

fn check_schema(found: u32, path: &Path) -> Result<(), CliError> {
    if found != SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "{}: schema version {found} (this build reads {SCHEMA_VERSION})",
            path.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- bin model

#[derive(Debug, Serialize, Deserialize)]
struct BinModelFile {
    schema_version: u32,
    n_bins: usize,
    /// Per-feature sorted center positions, `n_bins` each.
    centers: Vec<Vec<f64>>,
}

pub fn write_bin_model(model: &BinModel, prefix: &Path) -> Result<PathBuf, CliError> {
    let path = artifact_path(prefix, ".model.json");
    let file = BinModelFile {
        schema_version: SCHEMA_VERSION,
        n_bins: model.n_bins(),
        centers: (0..model.feature_count())
            .map(|j| model.centers(j).to_vec())
            .collect(),
    };
    write_json(&file, &path)?;
    Ok(path)
}

pub fn read_bin_model(prefix: &Path) -> Result<BinModel, CliError> {
    let path = artifact_path(prefix, ".model.json");
    let file: BinModelFile = read_json(&path)?;
    check_schema(file.schema_version, &path)?;
    BinModel::from_parts(file.n_bins, file.centers).map_err(CliError::from)
}

// ----------------------------------------------------------- representation

/// How an encode run was invoked; stored so downstream artifacts are
/// self-describing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeConfig {
    pub input: String,
    pub label_column: Option<String>,
    pub n_bins: usize,
    pub missing_markers: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationMeta {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub n_bins: usize,
    /// Column layout of the payload: blocks of `n_bins` columns per feature.
    pub layout: String,
    pub dataset_hash: Option<String>,
    /// One string per row, one character per feature:
    /// `O`bserved, p`E`nding, `I`ntersection, `U`nion, `P`rior.
    pub levels: Vec<String>,
    pub config: Option<EncodeConfig>,
}

pub fn level_char(level: FallbackLevel) -> char {
    match level {
        FallbackLevel::Observed => 'O',
        FallbackLevel::Pending => 'E',
        FallbackLevel::Intersection => 'I',
        FallbackLevel::Union => 'U',
        FallbackLevel::Prior => 'P',
    }
}

fn level_from_char(c: char) -> Result<FallbackLevel, CliError> {
    Ok(match c {
        'O' => FallbackLevel::Observed,
        'E' => FallbackLevel::Pending,
        'I' => FallbackLevel::Intersection,
        'U' => FallbackLevel::Union,
        'P' => FallbackLevel::Prior,
        other => return Err(CliError::Data(format!("unknown level code '{other}'"))),
    })
}

/// Writes the metadata, dense, and sparse files; returns the paths written.
pub fn write_representation(
    rep: &Representation,
    prefix: &Path,
    dataset_hash: Option<String>,
    config: Option<EncodeConfig>,
) -> Result<Vec<PathBuf>, CliError> {
    let meta_path = artifact_path(prefix, ".rep.json");
    let dense_path = artifact_path(prefix, ".rep.csv");
    let sparse_path = artifact_path(prefix, ".rep.sparse.csv");

    let meta = RepresentationMeta {
        schema_version: SCHEMA_VERSION,
        n: rep.n(),
        d: rep.d(),
        n_bins: rep.n_bins(),
        layout: "feature-major".to_string(),
        dataset_hash,
        levels: (0..rep.n())
            .map(|i| rep.levels_row(i).iter().copied().map(level_char).collect())
            .collect(),
        config,
    };
    write_json(&meta, &meta_path)?;

    let mut dense = csv::Writer::from_path(&dense_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", dense_path.display())))?;
    let header: Vec<String> = (0..rep.d())
        .flat_map(|j| (0..rep.n_bins()).map(move |k| format!("f{j}_b{k}")))
        .collect();
    dense.write_record(&header)?;
    for i in 0..rep.n() {
        let row: Vec<String> = rep.row(i).iter().map(|v| format!("{v}")).collect();
        dense.write_record(&row)?;
    }
    dense.flush().map_err(CliError::from)?;

    let mut sparse = csv::Writer::from_path(&sparse_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", sparse_path.display())))?;
    sparse.write_record(["row", "col", "value"])?;
    for i in 0..rep.n() {
        for (c, &v) in rep.row(i).iter().enumerate() {
            if v != 0.0 {
                sparse.write_record([i.to_string(), c.to_string(), format!("{v}")])?;
            }
        }
    }
    sparse.flush().map_err(CliError::from)?;

    Ok(vec![meta_path, dense_path, sparse_path])
}

/// Reloads a representation from `{prefix}.rep.json` + `{prefix}.rep.sparse.csv`.
pub fn read_representation(
    prefix: &Path,
) -> Result<(Representation, RepresentationMeta), CliError> {
    let meta_path = artifact_path(prefix, ".rep.json");
    let meta: RepresentationMeta = read_json(&meta_path)?;
    check_schema(meta.schema_version, &meta_path)?;
    if meta.levels.len() != meta.n {
        return Err(CliError::Data(format!(
            "{}: {} level strings for {} rows",
            meta_path.display(),
            meta.levels.len(),
            meta.n
        )));
    }
    let mut levels = Vec::with_capacity(meta.n * meta.d);
    for (i, text) in meta.levels.iter().enumerate() {
        if text.chars().count() != meta.d {
            return Err(CliError::Data(format!(
                "{}: row {i} level string has {} characters, expected {}",
                meta_path.display(),
                text.chars().count(),
                meta.d
            )));
        }
        for c in text.chars() {
            levels.push(level_from_char(c)?);
        }
    }

    let sparse_path = artifact_path(prefix, ".rep.sparse.csv");
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&sparse_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", sparse_path.display())))?;
    let width = meta.d * meta.n_bins;
    let mut z = vec![0.0f64; meta.n * width];
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::Data(format!("{}: {e}", sparse_path.display())))?;
        if record.len() != 3 {
            return Err(CliError::Data(format!(
                "{}: expected row,col,value triplets",
                sparse_path.display()
            )));
        }
        let parse = |field: &str, what: &str| -> Result<usize, CliError> {
            field.parse().map_err(|_| {
                CliError::Data(format!("{}: bad {what} '{field}'", sparse_path.display()))
            })
        };
        let row = parse(&record[0], "row index")?;
        let col = parse(&record[1], "column index")?;
        let value: f64 = record[2].parse().map_err(|_| {
            CliError::Data(format!(
                "{}: bad value '{}'",
                sparse_path.display(),
                &record[2]
            ))
        })?;
        if row >= meta.n || col >= width {
            return Err(CliError::Data(format!(
                "{}: entry ({row}, {col}) outside a {}x{width} matrix",
                sparse_path.display(),
                meta.n
            )));
        }
        z[row * width + col] = value;
    }

    let rep = Representation::from_parts(meta.n, meta.d, meta.n_bins, z, levels)?;
    Ok((rep, meta))
}

// ------------------------------------------------------------------- gram

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramMeta {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub n_bins: usize,
    pub dataset_hash: Option<String>,
    /// Present when the writer ran the spectral check.
    pub min_eigenvalue: Option<f64>,
}

pub fn write_gram(
    gram: &GramMatrix,
    prefix: &Path,
    meta: &GramMeta,
) -> Result<Vec<PathBuf>, CliError> {
    let meta_path = artifact_path(prefix, ".gram.json");
    let csv_path = artifact_path(prefix, ".gram.csv");
    write_json(meta, &meta_path)?;

    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&csv_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", csv_path.display())))?;
    for i in 0..gram.n() {
        let row: Vec<String> = (0..gram.n())
            .map(|j| format!("{}", gram.get(i, j)))
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush().map_err(CliError::from)?;
    Ok(vec![meta_path, csv_path])
}

pub fn read_gram(prefix: &Path) -> Result<(GramMatrix, GramMeta), CliError> {
    let meta_path = artifact_path(prefix, ".gram.json");
    let meta: GramMeta = read_json(&meta_path)?;
    check_schema(meta.schema_version, &meta_path)?;

    let csv_path = artifact_path(prefix, ".gram.csv");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(&csv_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", csv_path.display())))?;
    let mut data = Vec::with_capacity(meta.n * meta.n);
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", csv_path.display())))?;
        if record.len() != meta.n {
            return Err(CliError::Data(format!(
                "{}: row width {} does not match n = {}",
                csv_path.display(),
                record.len(),
                meta.n
            )));
        }
        for field in record.iter() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::Data(format!("{}: bad value '{field}'", csv_path.display()))
            })?;
            data.push(value);
        }
    }
    if data.len() != meta.n * meta.n {
        return Err(CliError::Data(format!(
            "{}: {} values for an {}x{} matrix",
            csv_path.display(),
            data.len(),
            meta.n,
            meta.n
        )));
    }
    Ok((GramMatrix::new(meta.n, data), meta))
}
