//! Dataset loading (CSV / ARFF), preprocessing and eligibility checks.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Token used for the category that replaces missing nominal values.
pub const MISSING_CATEGORY: &str = "__missing__";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Arff,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("csv") => Ok(Format::Csv),
            Some("arff") => Ok(Format::Arff),
            _ => Err(Error::UnknownFormat(path.to_path_buf())),
        }
    }
}

/// A column as it appears in the source file.
#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<Option<f64>>),
    Nominal {
        categories: Vec<String>,
        codes: Vec<Option<usize>>,
    },
    Logical(Vec<Option<bool>>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Numeric(v) => v.len(),
            RawColumn::Nominal { codes, .. } => codes.len(),
            RawColumn::Logical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawAttribute {
    pub name: String,
    pub column: RawColumn,
}

/// Dataset before preprocessing: original attribute kinds and missing values kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub attributes: Vec<RawAttribute>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl RawDataset {
    /// Wraps a fully observed numeric matrix, e.g. synthetic data.
    pub fn from_numeric(name: &str, x: &Matrix, labels: Vec<usize>) -> RawDataset {
        let n_classes = labels.iter().max().map(|m| m + 1).unwrap_or(0);
        let attributes = (0..x.cols())
            .map(|j| RawAttribute {
                name: format!("x{j}"),
                column: RawColumn::Numeric(x.column(j).into_iter().map(Some).collect()),
            })
            .collect();
        RawDataset {
            name: name.to_string(),
            attributes,
            labels,
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
        }
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    OneHotCategory,
    BinaryFromLogical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub origin: String,
    pub kind: ColumnKind,
}

/// Kind of an original (pre-encoding) attribute that survived preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Nominal { categories: usize },
    Logical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeInfo {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl AttributeInfo {
    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }
}

/// Preprocessed classification dataset in canonical numeric form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub x: Matrix,
    pub y: Vec<usize>,
    pub n_classes: usize,
    pub class_names: Vec<String>,
    pub columns: Vec<ColumnMeta>,
    pub attributes: Vec<AttributeInfo>,
}

impl Dataset {
    /// Builds a dataset from an already numeric matrix without transforming it.
    pub fn from_matrix(name: &str, x: Matrix, y: Vec<usize>) -> Dataset {
        let n_classes = y.iter().max().map(|m| m + 1).unwrap_or(0);
        let columns = (0..x.cols())
            .map(|j| ColumnMeta {
                name: format!("x{j}"),
                origin: format!("x{j}"),
                kind: ColumnKind::Numeric,
            })
            .collect();
        let attributes = (0..x.cols())
            .map(|j| AttributeInfo {
                name: format!("x{j}"),
                kind: AttributeKind::Numeric,
            })
            .collect();
        Dataset {
            name: name.to_string(),
            x,
            y,
            n_classes,
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            columns,
            attributes,
        }
    }

    pub fn n_instances(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.y, self.n_classes)
    }

    /// Row subset sharing the column metadata.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            columns: self.columns.clone(),
            attributes: self.attributes.clone(),
        }
    }

    /// Re-expresses the preprocessed matrix as an all-numeric raw dataset.
    pub fn to_raw(&self) -> RawDataset {
        let attributes = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| RawAttribute {
                name: c.name.clone(),
                column: RawColumn::Numeric(self.x.column(j).into_iter().map(Some).collect()),
            })
            .collect();
        RawDataset {
            name: self.name.clone(),
            attributes,
            labels: self.y.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Writes the canonical preprocessed form: a CSV matrix plus a JSON sidecar
    /// holding class names and column metadata.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        let mut header: Vec<String> = self.columns.iter().map(|c| c.name.clone()).collect();
        header.push("class".into());
        w.write_record(&header)?;
        for i in 0..self.n_instances() {
            let mut rec: Vec<String> = self.x.row(i).iter().map(|v| format!("{v:?}")).collect();
            rec.push(self.y[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(csv_path, e))?;
        let meta = DatasetMeta {
            name: self.name.clone(),
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
            columns: self.columns.clone(),
            attributes: self.attributes.clone(),
        };
        let side = sidecar_path(csv_path);
        fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&side, e))
    }

    pub fn load(csv_path: &Path) -> Result<Dataset> {
        let side = sidecar_path(csv_path);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: DatasetMeta = serde_json::from_str(&text)?;
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(csv_path)?;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse_err = |m: String| Error::Parse {
                path: csv_path.to_path_buf(),
                line: line + 2,
                message: m,
            };
            let n = rec.len();
            if n != meta.columns.len() + 1 {
                return Err(parse_err(format!("expected {} fields, got {n}", meta.columns.len() + 1)));
            }
            let row = rec
                .iter()
                .take(n - 1)
                .map(|s| s.parse::<f64>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            y.push(rec[n - 1].parse::<usize>().map_err(|e| parse_err(e.to_string()))?);
        }
        let mut x = Matrix::from_rows(&rows);
        if rows.is_empty() {
            x = Matrix::zeros(0, meta.columns.len());
        }
        Ok(Dataset {
            name: meta.name,
            x,
            y,
            n_classes: meta.n_classes,
            class_names: meta.class_names,
            columns: meta.columns,
            attributes: meta.attributes,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetMeta {
    name: String,
    n_classes: usize,
    class_names: Vec<String>,
    columns: Vec<ColumnMeta>,
    attributes: Vec<AttributeInfo>,
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn class_counts(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &l in y {
        c[l] += 1;
    }
    c
}

fn is_missing(s: &str) -> bool {
    let t = s.trim();
    t.is_empty() || t == "?"
}

fn parse_logical(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "t" => Some(true),
        "false" | "f" => Some(false),
        _ => None,
    }
}

/// Infers a column kind from string cells: numeric, logical, else nominal.
fn infer_column(cells: &[&str]) -> RawColumn {
    let present: Vec<&str> = cells.iter().copied().filter(|c| !is_missing(c)).collect();
    if present.iter().all(|c| c.trim().parse::<f64>().is_ok()) {
        return RawColumn::Numeric(
            cells
                .iter()
                .map(|c| if is_missing(c) { None } else { c.trim().parse().ok() })
                .collect(),
        );
    }
    if present.iter().all(|c| parse_logical(c).is_some()) {
        return RawColumn::Logical(
            cells
                .iter()
                .map(|c| if is_missing(c) { None } else { parse_logical(c) })
                .collect(),
        );
    }
    let mut categories: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let codes = cells
        .iter()
        .map(|c| {
            if is_missing(c) {
                return None;
            }
            let key = c.trim().to_string();
            let next = categories.len();
            let code = *index.entry(key.clone()).or_insert_with(|| {
                categories.push(key);
                next
            });
            Some(code)
        })
        .collect();
    RawColumn::Nominal { categories, codes }
}

fn map_classes(cells: &[String]) -> Result<(Vec<usize>, Vec<String>)> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(cells.len());
    for c in cells {
        let next = names.len();
        let id = *index.entry(c.as_str()).or_insert_with(|| {
            names.push(c.clone());
            next
        });
        labels.push(id);
    }
    if names.len() < 2 {
        return Err(Error::TooFewClasses(names.len()));
    }
    Ok((labels, names))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}

/// Loads a raw dataset. Class indices follow first appearance in the file.
pub fn load_dataset(path: &Path, format: Format, target: &str) -> Result<RawDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    match format {
        Format::Csv => parse_csv(path, &text, target),
        Format::Arff => parse_arff(path, &text, target),
    }
}

fn parse_csv(path: &Path, text: &str, target: &str) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let target_idx = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("expected {} fields, got {}", header.len(), rec.len()),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            columns[j].push(cell.to_string());
        }
    }
    let targets = std::mem::take(&mut columns[target_idx]);
    if targets.iter().any(|t| is_missing(t)) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing value in target column".into(),
        });
    }
    let (labels, class_names) = map_classes(&targets)?;
    let attributes = header
        .iter()
        .zip(&columns)
        .enumerate()
        .filter(|(j, _)| *j != target_idx)
        .map(|(_, (name, cells))| {
            let refs: Vec<&str> = cells.iter().map(|s| s.as_str()).collect();
            RawAttribute {
                name: name.clone(),
                column: infer_column(&refs),
            }
        })
        .collect();
    Ok(RawDataset {
        name: dataset_name(path),
        attributes,
        labels,
        class_names,
    })
}

enum ArffType {
    Numeric,
    Nominal(Vec<String>),
    Text,
}

fn unquote(s: &str) -> String {
    let t = s.trim();
    if t.len() >= 2 && ((t.starts_with('\'') && t.ends_with('\'')) || (t.starts_with('"') && t.ends_with('"'))) {
        t[1..t.len() - 1].to_string()
    } else {
        t.to_string()
    }
}

/// Splits on commas outside single or double quotes.
fn split_quoted(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    for ch in line.chars() {
        match (quote, ch) {
            (None, '\'') | (None, '"') => {
                quote = Some(ch);
                cur.push(ch);
            }
            (Some(q), c) if c == q => {
                quote = None;
                cur.push(ch);
            }
            (None, ',') => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out.into_iter().map(|s| unquote(&s)).collect()
}

fn parse_arff(path: &Path, text: &str, target: &str) -> Result<RawDataset> {
    let err = |line: usize, m: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: m.to_string(),
    };
    let mut decls: Vec<(String, ArffType)> = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut in_data = false;
    let mut relation = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if in_data {
            if line.starts_with('{') {
                return Err(err(i + 1, "sparse ARFF rows are not supported"));
            }
            let cells = split_quoted(line);
            if cells.len() != decls.len() {
                return Err(err(
                    i + 1,
                    &format!("expected {} fields, got {}", decls.len(), cells.len()),
                ));
            }
            rows.push(cells);
        } else if lower.starts_with("@relation") {
            relation = Some(unquote(line[9..].trim()));
        } else if lower.starts_with("@attribute") {
            let rest = line[10..].trim();
            let (name, ty) = if rest.starts_with('\'') || rest.starts_with('"') {
                let q = rest.chars().next().unwrap();
                let end = rest[1..].find(q).ok_or_else(|| err(i + 1, "unterminated attribute name"))? + 1;
                (rest[1..end].to_string(), rest[end + 1..].trim())
            } else {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '{')
                    .ok_or_else(|| err(i + 1, "attribute without type"))?;
                (rest[..end].to_string(), rest[end..].trim())
            };
            let ty_lower = ty.to_ascii_lowercase();
            let kind = if ty.starts_with('{') {
                let inner = ty
                    .trim_start_matches('{')
                    .trim_end_matches('}');
                ArffType::Nominal(split_quoted(inner).into_iter().filter(|s| !s.is_empty()).collect())
            } else if ["numeric", "real", "integer"].contains(&ty_lower.as_str()) {
                ArffType::Numeric
            } else if ty_lower == "string" || ty_lower.starts_with("date") {
                ArffType::Text
            } else {
                return Err(err(i + 1, &format!("unknown attribute type `{ty}`")));
            };
            decls.push((name, kind));
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(err(i + 1, &format!("unexpected line `{line}`")));
        }
    }
    if !in_data {
        return Err(err(0, "no @data section"));
    }
    let target_idx = decls
        .iter()
        .position(|(n, _)| n == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;
    let targets: Vec<String> = rows.iter().map(|r| r[target_idx].clone()).collect();
    if targets.iter().any(|t| is_missing(t)) {
        return Err(err(0, "missing value in target column"));
    }
    let (labels, class_names) = map_classes(&targets)?;
    let mut attributes = Vec::new();
    for (j, (name, ty)) in decls.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let cells: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
        let column = match ty {
            ArffType::Numeric => {
                let mut v = Vec::with_capacity(cells.len());
                for (i, c) in cells.iter().enumerate() {
                    if is_missing(c) {
                        v.push(None);
                    } else {
                        v.push(Some(c.trim().parse::<f64>().map_err(|_| {
                            err(0, &format!("row {}: `{c}` is not numeric for `{name}`", i + 1))
                        })?));
                    }
                }
                RawColumn::Numeric(v)
            }
            ArffType::Nominal(cats) => {
                let lower: Vec<String> = cats.iter().map(|c| c.to_ascii_lowercase()).collect();
                let logical = cats.len() == 2
                    && lower.iter().all(|c| parse_logical(c).is_some())
                    && parse_logical(&lower[0]) != parse_logical(&lower[1]);
                if logical {
                    RawColumn::Logical(
                        cells
                            .iter()
                            .map(|c| if is_missing(c) { None } else { parse_logical(c) })
                            .collect(),
                    )
                } else {
                    let mut codes = Vec::with_capacity(cells.len());
                    for c in &cells {
                        if is_missing(c) {
                            codes.push(None);
                        } else {
                            let pos = cats.iter().position(|k| k == c.trim()).ok_or_else(|| {
                                err(0, &format!("value `{c}` not declared for `{name}`"))
                            })?;
                            codes.push(Some(pos));
                        }
                    }
                    RawColumn::Nominal {
                        categories: cats.clone(),
                        codes,
                    }
                }
            }
            ArffType::Text => infer_column(&cells),
        };
        attributes.push(RawAttribute {
            name: name.clone(),
            column,
        });
    }
    Ok(RawDataset {
        name: relation
            .filter(|r| !r.is_empty())
            .unwrap_or_else(|| dataset_name(path)),
        attributes,
        labels,
        class_names,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

struct Encoded {
    meta: ColumnMeta,
    values: Vec<f64>,
}

/// Runs the preprocessing chain: drop constant/identifier columns, map logical
/// to {0,1}, impute, one-hot encode, standardize (sample sd).
pub fn preprocess(raw: &RawDataset) -> Result<Dataset> {
    let n = raw.n_instances();
    let mut encoded: Vec<Encoded> = Vec::new();
    let mut attributes = Vec::new();
    for attr in &raw.attributes {
        match &attr.column {
            RawColumn::Numeric(v) => {
                let mut observed: Vec<f64> = v.iter().flatten().copied().collect();
                if distinct_f64(&observed) <= 1 {
                    continue;
                }
                let med = median(&mut observed);
                encoded.push(Encoded {
                    meta: ColumnMeta {
                        name: attr.name.clone(),
                        origin: attr.name.clone(),
                        kind: ColumnKind::Numeric,
                    },
                    values: v.iter().map(|x| x.unwrap_or(med)).collect(),
                });
                attributes.push(AttributeInfo {
                    name: attr.name.clone(),
                    kind: AttributeKind::Numeric,
                });
            }
            RawColumn::Logical(v) => {
                let mut observed: Vec<f64> =
                    v.iter().flatten().map(|&b| if b { 1.0 } else { 0.0 }).collect();
                if distinct_f64(&observed) <= 1 {
                    continue;
                }
                let med = median(&mut observed);
                encoded.push(Encoded {
                    meta: ColumnMeta {
                        name: attr.name.clone(),
                        origin: attr.name.clone(),
                        kind: ColumnKind::BinaryFromLogical,
                    },
                    values: v
                        .iter()
                        .map(|x| x.map(|b| if b { 1.0 } else { 0.0 }).unwrap_or(med))
                        .collect(),
                });
                attributes.push(AttributeInfo {
                    name: attr.name.clone(),
                    kind: AttributeKind::Logical,
                });
            }
            RawColumn::Nominal { categories, codes } => {
                let missing_code = categories.len();
                let full: Vec<usize> = codes.iter().map(|c| c.unwrap_or(missing_code)).collect();
                let mut counts = vec![0usize; categories.len() + 1];
                for &c in &full {
                    counts[c] += 1;
                }
                let used: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
                let identifier = n > 1 && used.len() == n;
                if used.len() <= 1 || identifier {
                    continue;
                }
                for &c in &used {
                    let cat = if c == missing_code {
                        MISSING_CATEGORY
                    } else {
                        categories[c].as_str()
                    };
                    encoded.push(Encoded {
                        meta: ColumnMeta {
                            name: format!("{}={}", attr.name, cat),
                            origin: attr.name.clone(),
                            kind: ColumnKind::OneHotCategory,
                        },
                        values: full.iter().map(|&v| if v == c { 1.0 } else { 0.0 }).collect(),
                    });
                }
                attributes.push(AttributeInfo {
                    name: attr.name.clone(),
                    kind: AttributeKind::Nominal {
                        categories: used.len(),
                    },
                });
            }
        }
    }
    let mut kept = Vec::with_capacity(encoded.len());
    for mut col in encoded {
        let (mean, sd) = mean_sd(&col.values);
        if sd <= 0.0 || !sd.is_finite() {
            continue;
        }
        for v in &mut col.values {
            *v = (*v - mean) / sd;
        }
        kept.push(col);
    }
    if kept.is_empty() {
        return Err(Error::EmptyAfterPreprocessing(raw.name.clone()));
    }
    let cols = kept.len();
    let mut x = Matrix::zeros(n, cols);
    for (j, col) in kept.iter().enumerate() {
        for i in 0..n {
            x.set(i, j, col.values[i]);
        }
    }
    let surviving: std::collections::HashSet<&str> =
        kept.iter().map(|c| c.meta.origin.as_str()).collect();
    attributes.retain(|a| surviving.contains(a.name.as_str()));
    Ok(Dataset {
        name: raw.name.clone(),
        x,
        y: raw.labels.clone(),
        n_classes: raw.class_names.len(),
        class_names: raw.class_names.clone(),
        columns: kept.into_iter().map(|c| c.meta).collect(),
        attributes,
    })
}

fn distinct_f64(values: &[f64]) -> usize {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v.len()
}

pub const MAX_FEATURES: usize = 1500;
pub const MIN_INSTANCES: usize = 100;
pub const MAX_INSTANCES: usize = 50_000;
pub const MIN_CLASS_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub criterion: char,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EligibilityReport {
    pub eligible: bool,
    pub violated_criteria: Vec<Violation>,
    /// Informational notes (non-machine-checkable criteria, count disagreements).
    pub notes: Vec<String>,
}

/// Evaluates the machine-checkable selection criteria (a), (b) and (e).
///
/// The feature cap is judged on the original attribute count; the encoded
/// count is evaluated as well and any disagreement is noted.
pub fn check_eligibility(d: &Dataset) -> EligibilityReport {
    let mut violated = Vec::new();
    let mut notes = Vec::new();
    let original = d.attributes.len();
    let encoded = d.n_features();
    if original > MAX_FEATURES {
        violated.push(Violation {
            criterion: 'a',
            message: format!("{original} attributes exceed {MAX_FEATURES}"),
        });
    }
    if (original > MAX_FEATURES) != (encoded > MAX_FEATURES) {
        notes.push(format!(
            "feature cap disagrees: {original} original attributes vs {encoded} encoded columns"
        ));
    }
    let n = d.n_instances();
    if !(MIN_INSTANCES..=MAX_INSTANCES).contains(&n) {
        violated.push(Violation {
            criterion: 'b',
            message: format!("{n} instances outside [{MIN_INSTANCES}, {MAX_INSTANCES}]"),
        });
    }
    for (c, &count) in d.class_counts().iter().enumerate() {
        if count < MIN_CLASS_SIZE {
            violated.push(Violation {
                criterion: 'e',
                message: format!(
                    "class `{}` has {count} instances (< {MIN_CLASS_SIZE})",
                    d.class_names.get(c).map(|s| s.as_str()).unwrap_or("?")
                ),
            });
        }
    }
    notes.push("criteria c and d (dataset provenance) are not machine-checkable".into());
    EligibilityReport {
        eligible: violated.is_empty(),
        violated_criteria: violated,
        notes,
    }
}
