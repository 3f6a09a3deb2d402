//! Dataset CSV loading and writing.
//!
//! Loading rules: cells are trimmed; a cell equal to one of the
//! missing-value markers (default `?` and the empty string) is missing.
//! A column whose observed cells all parse as finite numbers is numeric;
//! anything else is categorical, with codes assigned by first appearance
//! from the top of the file. An optional label column is pulled out of the
//! feature set and encoded the same way.

use std::collections::HashMap;
use std::path::Path;

use pk_core::{CategoryMap, Dataset, FeatureKind};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Cell contents treated as missing unless overridden.
pub const DEFAULT_MISSING_MARKERS: &[&str] = &["?", ""];

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Column to extract as class labels.
    pub label_column: Option<String>,
    pub missing_markers: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            label_column: None,
            missing_markers: DEFAULT_MISSING_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl LoadOptions {
    pub fn with_label(label: &str) -> Self {
        Self {
            label_column: Some(label.to_string()),
            ..Self::default()
        }
    }
}

/// A loaded dataset plus the label metadata that only exists file-side.
#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub dataset: Dataset,
    pub label_column: Option<String>,
    /// Class names by label id (first-appearance order).
    pub label_classes: Option<Vec<String>>,
}

/// Loads a headered CSV file into a [`Dataset`].
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<LoadedTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let label_idx = match &opts.label_column {
        None => None,
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::Data(format!("label column '{name}' not found")))?,
        ),
    };

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        records.push(record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }
    let n = records.len();
    if n == 0 {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| Some(c) != label_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(CliError::Data("no feature columns".to_string()));
    }
    let d = feature_cols.len();
    let is_missing = |cell: &str| -> bool { opts.missing_markers.iter().any(|m| m == cell) };

    // Classify and encode one column at a time.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut kinds: Vec<FeatureKind> = Vec::with_capacity(d);
    let mut missing = vec![false; n * d];
    for (jf, &c) in feature_cols.iter().enumerate() {
        let cells: Vec<&str> = records.iter().map(|r| &r[c]).collect();
        for (i, &cell) in cells.iter().enumerate() {
            missing[i * d + jf] = is_missing(cell);
        }
        let numeric: Option<Vec<f64>> = cells
            .iter()
            .enumerate()
            .map(|(i, &cell)| {
                if missing[i * d + jf] {
                    Some(f64::NAN)
                } else {
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => Some(v),
                        _ => None,
                    }
                }
            })
            .collect();
        match numeric {
            Some(values) => {
                columns.push(values);
                kinds.push(FeatureKind::Numeric);
            }
            None => {
                // Ordinal codes by first appearance.
                let mut seen: HashMap<String, usize> = HashMap::new();
                let mut names: Vec<String> = Vec::new();
                let mut values = Vec::with_capacity(n);
                for (i, &cell) in cells.iter().enumerate() {
                    if missing[i * d + jf] {
                        values.push(f64::NAN);
                        continue;
                    }
                    let code = *seen.entry(cell.to_string()).or_insert_with(|| {
                        names.push(cell.to_string());
                        names.len() - 1
                    });
                    values.push(code as f64);
                }
                columns.push(values);
                kinds.push(FeatureKind::Categorical(CategoryMap::new(names)));
            }
        }
    }

    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        for col in columns.iter() {
            values.push(col[i]);
        }
    }
    let names: Vec<String> = feature_cols.iter().map(|&c| headers[c].clone()).collect();

    let (labels, label_classes) = match label_idx {
        None => (None, None),
        Some(c) => {
            let mut seen: HashMap<String, u32> = HashMap::new();
            let mut classes: Vec<String> = Vec::new();
            let mut ids = Vec::with_capacity(n);
            for (i, record) in records.iter().enumerate() {
                let cell = &record[c];
                if is_missing(cell) {
                    return Err(CliError::Data(format!("missing label in data row {i}")));
                }
                let id = *seen.entry(cell.to_string()).or_insert_with(|| {
                    classes.push(cell.to_string());
                    (classes.len() - 1) as u32
                });
                ids.push(id);
            }
            (Some(ids), Some(classes))
        }
    };

    let dataset = Dataset::new(values, missing, kinds, names, labels)?;
    Ok(LoadedTable {
        dataset,
        label_column: opts.label_column.clone(),
        label_classes,
    })
}

/// Writes a table back to CSV (features in order, label column last).
/// Numeric cells print in shortest round-trip form, categorical cells as
/// their category names, missing cells as `marker`.
pub fn write_csv(table: &LoadedTable, path: &Path, marker: &str) -> Result<(), CliError> {
    let ds = &table.dataset;
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;

    let mut header: Vec<String> = ds.names().to_vec();
    if ds.labels().is_some() {
        header.push(
            table
                .label_column
                .clone()
                .unwrap_or_else(|| "class".to_string()),
        );
    }
    writer.write_record(&header)?;

    for i in 0..ds.n() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for j in 0..ds.d() {
            match ds.get(i, j) {
                None => row.push(marker.to_string()),
                Some(v) => match &ds.kinds()[j] {
                    FeatureKind::Numeric => row.push(format!("{v}")),
                    FeatureKind::Categorical(map) => {
                        let name = map.name(v as usize).ok_or_else(|| {
                            CliError::Internal(format!("code {v} out of range in column {j}"))
                        })?;
                        row.push(name.to_string());
                    }
                },
            }
        }
        if let Some(labels) = ds.labels() {
            let id = labels[i] as usize;
            let text = table
                .label_classes
                .as_ref()
                .and_then(|c| c.get(id).cloned())
                .unwrap_or_else(|| id.to_string());
            row.push(text);
        }
        writer.write_record(&row)?;
    }
    writer.flush().map_err(CliError::from)?;
    Ok(())
}

/// Content hash of a dataset (shape, names, kinds, cells, mask, labels),
/// used to tie derived artifacts back to their input.
pub fn dataset_hash(ds: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update(b"pk-dataset-v1");
    h.update((ds.n() as u64).to_le_bytes());
    h.update((ds.d() as u64).to_le_bytes());
    for j in 0..ds.d() {
        let name = &ds.names()[j];
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        match &ds.kinds()[j] {
            FeatureKind::Numeric => h.update([0u8]),
            FeatureKind::Categorical(map) => {
                h.update([1u8]);
                h.update((map.len() as u64).to_le_bytes());
                for name in map.names() {
                    h.update((name.len() as u64).to_le_bytes());
                    h.update(name.as_bytes());
                }
            }
        }
    }
    for i in 0..ds.n() {
        for j in 0..ds.d() {
            match ds.get(i, j) {
                None => h.update([1u8; 9]),
                Some(v) => {
                    h.update([0u8]);
                    h.update(v.to_le_bytes());
                }
            }
        }
    }
    match ds.labels() {
        None => h.update([0u8]),
        Some(labels) => {
            h.update([1u8]);
            for &l in labels {
                h.update(l.to_le_bytes());
            }
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_numeric_columns_with_markers() {
        let f = write_temp("a,b\n1.5,2\n?,4\n3.5,\n");
        let table = load_csv(f.path(), &LoadOptions::default()).unwrap();
        let ds = &table.dataset;
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.kinds(), &[FeatureKind::Numeric, FeatureKind::Numeric]);
        assert_eq!(ds.get(0, 0), Some(1.5));
        assert_eq!(ds.get(1, 0), None);
        assert_eq!(ds.get(2, 1), None);
        assert_eq!(ds.names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn encodes_text_columns_by_first_appearance() {
        let f = write_temp("color,x\nred,1\nblue,2\nred,3\ngreen,4\n");
        let table = load_csv(f.path(), &LoadOptions::default()).unwrap();
        let ds = &table.dataset;
        match &ds.kinds()[0] {
            FeatureKind::Categorical(map) => {
                assert_eq!(map.names(), &["red", "blue", "green"]);
            }
            k => panic!("expected categorical, got {k:?}"),
        }
        assert_eq!(ds.get(0, 0), Some(0.0));
        assert_eq!(ds.get(1, 0), Some(1.0));
        assert_eq!(ds.get(2, 0), Some(0.0));
        assert_eq!(ds.get(3, 0), Some(2.0));
    }

    #[test]
    fn mixed_numeric_text_column_is_categorical() {
        let f = write_temp("v\n1\ntwo\n3\n");
        let table = load_csv(f.path(), &LoadOptions::default()).unwrap();
        assert!(matches!(
            table.dataset.kinds()[0],
            FeatureKind::Categorical(_)
        ));
    }

    #[test]
    fn extracts_label_column() {
        let f = write_temp("x,class,y\n1,yes,10\n2,no,20\n3,yes,30\n");
        let table = load_csv(f.path(), &LoadOptions::with_label("class")).unwrap();
        let ds = &table.dataset;
        assert_eq!(ds.d(), 2);
        assert_eq!(ds.names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(ds.labels(), Some(&[0u32, 1, 0][..]));
        assert_eq!(
            table.label_classes.as_deref(),
            Some(&["yes".to_string(), "no".to_string()][..])
        );
        assert_eq!(ds.get(1, 1), Some(20.0));
    }

    #[test]
    fn missing_label_column_is_a_data_error() {
        let f = write_temp("x\n1\n");
        let err = load_csv(f.path(), &LoadOptions::with_label("class")).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_label_cell_is_a_data_error() {
        let f = write_temp("x,class\n1,yes\n2,?\n");
        let err = load_csv(f.path(), &LoadOptions::with_label("class")).unwrap_err();
        assert!(matches!(err, CliError::Data(_)));
    }

    #[test]
    fn ragged_rows_are_a_data_error() {
        let f = write_temp("a,b\n1,2\n3\n");
        assert!(matches!(
            load_csv(f.path(), &LoadOptions::default()),
            Err(CliError::Data(_))
        ));
    }

    #[test]
    fn fully_missing_column_is_a_data_error() {
        let f = write_temp("a,b\n1,?\n2,?\n");
        let err = load_csv(f.path(), &LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains('b'), "{err}");
    }

    #[test]
    fn custom_markers_replace_defaults() {
        let f = write_temp("a\nmissing\n7\n");
        let opts = LoadOptions {
            label_column: None,
            missing_markers: vec!["missing".to_string()],
        };
        let table = load_csv(f.path(), &opts).unwrap();
        assert_eq!(table.dataset.get(0, 0), None);
        assert_eq!(table.dataset.get(1, 0), Some(7.0));
    }

    #[test]
    fn cells_are_trimmed() {
        let f = write_temp("a,b\n 1.5 , red \n 2.5 , blue \n");
        let table = load_csv(f.path(), &LoadOptions::default()).unwrap();
        assert_eq!(table.dataset.get(0, 0), Some(1.5));
        match &table.dataset.kinds()[1] {
            FeatureKind::Categorical(map) => assert_eq!(map.names(), &["red", "blue"]),
            k => panic!("expected categorical, got {k:?}"),
        }
    }

    #[test]
    fn roundtrips_through_write_csv() {
        let f = write_temp("x,color,class\n1.25,red,yes\n?,blue,no\n-3,?,yes\n0.5,red,no\n");
        let opts = LoadOptions::with_label("class");
        let table = load_csv(f.path(), &opts).unwrap();
        let out = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        write_csv(&table, out.path(), "?").unwrap();
        let again = load_csv(out.path(), &opts).unwrap();

        let (a, b) = (&table.dataset, &again.dataset);
        assert_eq!(a.n(), b.n());
        assert_eq!(a.d(), b.d());
        assert_eq!(a.kinds(), b.kinds());
        assert_eq!(a.names(), b.names());
        assert_eq!(a.labels(), b.labels());
        assert_eq!(a.missing_mask(), b.missing_mask());
        for i in 0..a.n() {
            for j in 0..a.d() {
                match (a.get(i, j), b.get(i, j)) {
                    (Some(x), Some(y)) => assert_eq!(x.to_bits(), y.to_bits()),
                    (None, None) => {}
                    other => panic!("cell ({i}, {j}) mismatch: {other:?}"),
                }
            }
        }
        assert_eq!(dataset_hash(a), dataset_hash(b));
    }

    #[test]
    fn hash_is_sensitive_to_content() {
        let f = write_temp("a\n1\n2\n");
        let g = write_temp("a\n1\n3\n");
        let ta = load_csv(f.path(), &LoadOptions::default()).unwrap();
        let tb = load_csv(g.path(), &LoadOptions::default()).unwrap();
        assert_ne!(dataset_hash(&ta.dataset), dataset_hash(&tb.dataset));
        assert_eq!(dataset_hash(&ta.dataset), dataset_hash(&ta.dataset));
    }
}
