//! Delimited-text datasets and min-max normalization.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::Deserialize;
use sslart::persist::FeatureRanges;

use crate::error::{HarnessError, Result};

/// A column given by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

/// How to read a delimited file.
///
/// ```toml
/// header = true
/// class_column = "class"
/// feature_columns = ["a", "b"]   # optional, default: every other column
/// classes = ["neg", "pos"]       # optional, fixes class ids
/// delimiter = ","
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    #[serde(default = "default_header")]
    pub header: bool,
    /// Defaults to the last column.
    #[serde(default)]
    pub class_column: Option<ColumnRef>,
    #[serde(default)]
    pub feature_columns: Option<Vec<ColumnRef>>,
    /// Class names in id order. Without it ids follow first appearance.
    #[serde(default)]
    pub classes: Option<Vec<String>>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_header() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

impl Default for Schema {
    fn default() -> Self {
        Self { header: true, class_column: None, feature_columns: None, classes: None, delimiter: ',' }
    }
}

impl Schema {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Schema(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text).map_err(|e| HarnessError::Schema(format!("{}: {e}", path.display())))
    }

    /// `<dir>/<stem>.schema.toml` next to a data file, if present; otherwise
    /// the default schema.
    pub fn for_data_file(path: impl AsRef<Path>) -> Result<Self> {
        let sibling = schema_path_for(path.as_ref());
        if sibling.exists() {
            Self::from_file(sibling)
        } else {
            Ok(Self::default())
        }
    }
}

pub fn schema_path_for(data: &Path) -> PathBuf {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    data.with_file_name(format!("{stem}.schema.toml"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    /// Normalized features, one row per sample.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Raw per-feature range the features were scaled with.
    pub ranges: FeatureRanges,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn sample(&self, i: usize) -> (Vec<f64>, usize) {
        (self.features[i].clone(), self.labels[i])
    }

    pub fn pairs(&self) -> Vec<(Vec<f64>, usize)> {
        (0..self.len()).map(|i| self.sample(i)).collect()
    }
}

/// Per-feature minimum and maximum.
pub fn fit_ranges(rows: &[Vec<f64>]) -> FeatureRanges {
    let d = rows.first().map_or(0, Vec::len);
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in rows {
        for (i, &v) in row.iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
        }
    }
    FeatureRanges { min, max }
}

/// Scales every feature by `ranges`. Constant features map to 0 and values
/// outside the fitted range are clamped; returns the number of clamped cells.
pub fn apply_ranges(rows: &mut [Vec<f64>], ranges: &FeatureRanges) -> usize {
    let mut clamped = 0;
    for row in rows.iter_mut() {
        for (i, v) in row.iter_mut().enumerate() {
            let span = ranges.max[i] - ranges.min[i];
            let scaled = if span > 0.0 { (*v - ranges.min[i]) / span } else { 0.0 };
            if !(0.0..=1.0).contains(&scaled) {
                clamped += 1;
            }
            *v = scaled.clamp(0.0, 1.0);
        }
    }
    clamped
}

/// Min-max normalization fitted on `rows` themselves.
pub fn normalize(rows: &mut [Vec<f64>]) -> FeatureRanges {
    let ranges = fit_ranges(rows);
    apply_ranges(rows, &ranges);
    ranges
}

struct RawTable {
    feature_names: Vec<String>,
    class_names: Vec<String>,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

fn resolve(col: &ColumnRef, header: Option<&[String]>, width: usize) -> Result<usize> {
    let idx = match (col, header) {
        (ColumnRef::Index(i), _) => *i,
        (ColumnRef::Name(name), Some(h)) => h
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| HarnessError::Schema(format!("no column named `{name}` (columns: {})", h.join(", "))))?,
        (ColumnRef::Name(name), None) => name
            .parse()
            .map_err(|_| HarnessError::Schema(format!("column `{name}` given by name but the file has no header")))?,
    };
    if idx >= width {
        return Err(HarnessError::Schema(format!("column {idx} out of range for {width} columns")));
    }
    Ok(idx)
}

fn read_table(path: &Path, schema: &Schema) -> Result<RawTable> {
    let io_err = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let text = fs::read(path).map_err(io_err)?;
    let delimiter = u8::try_from(schema.delimiter).map_err(|_| HarnessError::Schema("delimiter must be a single-byte character".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_slice());
    let header: Option<Vec<String>> =
        if schema.header { Some(reader.headers()?.iter().map(str::to_string).collect()) } else { None };

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    let width = header.as_ref().map(Vec::len).or_else(|| records.first().map(|(_, r)| r.len())).unwrap_or(0);
    if width < 2 {
        return Err(HarnessError::Data(format!("{}: need at least one feature column and a class column", path.display())));
    }

    let class_col = match &schema.class_column {
        Some(c) => resolve(c, header.as_deref(), width)?,
        None => width - 1,
    };
    let feature_cols: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols.iter().map(|c| resolve(c, header.as_deref(), width)).collect::<Result<_>>()?,
        None => (0..width).filter(|&i| i != class_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(HarnessError::Schema("no feature columns".into()));
    }
    if feature_cols.contains(&class_col) {
        return Err(HarnessError::Schema("the class column is also listed as a feature".into()));
    }
    let feature_names = feature_cols
        .iter()
        .map(|&i| header.as_ref().map_or_else(|| format!("x{}", i + 1), |h| h[i].clone()))
        .collect();

    let fixed = schema.classes.is_some();
    let mut class_names = schema.classes.clone().unwrap_or_default();
    let mut class_ids: HashMap<String, usize> = class_names.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut features = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(HarnessError::Parse {
                path: path.to_path_buf(),
                row: *line,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = &rec[c];
            let v: f64 = cell.parse().map_err(|_| HarnessError::Parse {
                path: path.to_path_buf(),
                row: *line,
                column: c + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse { path: path.to_path_buf(), row: *line, column: c + 1, message: format!("`{cell}` is not finite") });
            }
            row.push(v);
        }
        let class = &rec[class_col];
        let id = match class_ids.get(class) {
            Some(&id) => id,
            None if fixed => {
                return Err(HarnessError::Parse {
                    path: path.to_path_buf(),
                    row: *line,
                    column: class_col + 1,
                    message: format!("class `{class}` is not one of {:?}", class_names),
                })
            }
            None => {
                class_names.push(class.to_string());
                class_ids.insert(class.to_string(), class_names.len() - 1);
                class_names.len() - 1
            }
        };
        features.push(row);
        labels.push(id);
    }
    if features.is_empty() {
        return Err(HarnessError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(RawTable { feature_names, class_names, features, labels })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

/// Reads `path` and scales every feature to `[0, 1]` over the whole file.
pub fn load_and_normalize(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let mut t = read_table(path, schema)?;
    let ranges = normalize(&mut t.features);
    for (i, (lo, hi)) in ranges.min.iter().zip(&ranges.max).enumerate() {
        if lo == hi {
            warn!("feature `{}` is constant and maps to 0", t.feature_names[i]);
        }
    }
    Ok(Dataset {
        name: dataset_name(path),
        feature_names: t.feature_names,
        class_names: t.class_names,
        features: t.features,
        labels: t.labels,
        ranges,
    })
}

/// Reads `path` and scales it with previously fitted ranges, mapping class
/// names onto `class_names`.
pub fn load_with_ranges(path: impl AsRef<Path>, schema: &Schema, ranges: &FeatureRanges, class_names: &[String]) -> Result<Dataset> {
    let path = path.as_ref();
    let mut schema = schema.clone();
    schema.classes = Some(class_names.to_vec());
    let mut t = read_table(path, &schema)?;
    if t.feature_names.len() != ranges.min.len() {
        return Err(HarnessError::Data(format!(
            "{}: {} features but the model expects {}",
            path.display(),
            t.feature_names.len(),
            ranges.min.len()
        )));
    }
    let clamped = apply_ranges(&mut t.features, ranges);
    if clamped > 0 {
        warn!("{clamped} values fell outside the training range and were clamped");
    }
    Ok(Dataset {
        name: dataset_name(path),
        feature_names: t.feature_names,
        class_names: t.class_names,
        features: t.features,
        labels: t.labels,
        ranges: ranges.clone(),
    })
}
