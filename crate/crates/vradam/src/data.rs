//! CSV and LIBSVM dataset loading with per-column min-max scaling.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use vradam_core::problems::Dataset;

/// A seeded 2,000-row table shaped like the forest cover-type data: 10
/// continuous columns, 4 + 40 one-hot columns, seven classes.
pub const BUNDLED_COVTYPE_CSV: &str = include_str!("../../../fixtures/covtype_like_2000.csv");

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("label error: {0}")]
    Label(String),
}

fn format_err(line: usize, message: impl Into<String>) -> DataError {
    DataError::Format { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Libsvm,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "libsvm" => Ok(DatasetFormat::Libsvm),
            other => Err(format!("unknown dataset format {other:?} (expected csv or libsvm)")),
        }
    }
}

/// Where a CSV file keeps its label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Named(String),
    First,
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Named("y".into())
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat, label: &LabelColumn) -> Result<Dataset, DataError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    match format {
        DatasetFormat::Csv => parse_csv(&text, label),
        DatasetFormat::Libsvm => parse_libsvm(&text),
    }
}

pub fn bundled_covtype() -> Dataset {
    parse_csv(BUNDLED_COVTYPE_CSV, &LabelColumn::default()).expect("bundled fixture parses")
}

fn parse_label(s: &str, line: usize) -> Result<i64, DataError> {
    let s = s.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => Ok(v as i64),
        _ => Err(format_err(line, format!("label {s:?} is not an integer"))),
    }
}

fn parse_value(s: &str, line: usize) -> Result<f64, DataError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format_err(line, format!("value {s:?} is not a finite number"))),
    }
}

/// Header row required; the label column is `y` by default.
pub fn parse_csv(text: &str, label: &LabelColumn) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| format_err(1, e.to_string()))?.clone();
    let label_idx = match label {
        LabelColumn::First => 0,
        LabelColumn::Named(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format_err(1, format!("no column named {name:?} in header")))?,
    };
    let dim = headers.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| format_err(1, "need a label and at least one feature column"))?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            format_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != headers.len() {
            return Err(format_err(line, format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                labels.push(parse_label(field, line)?);
            } else {
                features.push(parse_value(field, line)?);
            }
        }
    }
    finish(features, labels, dim)
}

/// `label index:value ...` with 1-based indices; the dimension is the largest
/// index seen. `#` starts a comment.
pub fn parse_libsvm(text: &str) -> Result<Dataset, DataError> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        labels.push(parse_label(parts.next().expect("non-empty line"), line)?);
        let mut row = Vec::new();
        let mut last = 0;
        for item in parts {
            let (idx, val) =
                item.split_once(':').ok_or_else(|| format_err(line, format!("expected index:value, got {item:?}")))?;
            let idx: usize = idx.parse().map_err(|_| format_err(line, format!("bad feature index {idx:?}")))?;
            if idx == 0 || idx <= last {
                return Err(format_err(line, "feature indices must be 1-based and strictly increasing"));
            }
            last = idx;
            row.push((idx - 1, parse_value(val, line)?));
            dim = dim.max(idx);
        }
        rows.push(row);
    }
    if dim == 0 {
        return Err(format_err(1, "no features found"));
    }
    let mut features = vec![0.0; rows.len() * dim];
    for (n, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[n * dim + j] = v;
        }
    }
    finish(features, labels, dim)
}

fn finish(mut features: Vec<f64>, raw_labels: Vec<i64>, dim: usize) -> Result<Dataset, DataError> {
    if raw_labels.is_empty() {
        return Err(DataError::Label("no samples".into()));
    }
    let (labels, classes) = map_labels(&raw_labels)?;
    normalize_min_max(&mut features, dim);
    Dataset::new(features, labels, dim, classes).map_err(|e| DataError::Label(e.to_string()))
}

/// Maps a contiguous integer label range onto `0..K`. `{-1, +1}` is accepted
/// as the binary convention.
pub fn map_labels(raw: &[i64]) -> Result<(Vec<usize>, usize), DataError> {
    let seen: BTreeSet<i64> = raw.iter().copied().collect();
    if seen == BTreeSet::from([-1, 1]) {
        return Ok((raw.iter().map(|&y| (y > 0) as usize).collect(), 2));
    }
    let (lo, hi) = (*seen.first().expect("non-empty"), *seen.last().expect("non-empty"));
    let span = (hi - lo + 1) as usize;
    if span != seen.len() {
        let missing: Vec<i64> = (lo..=hi).filter(|y| !seen.contains(y)).collect();
        return Err(DataError::Label(format!("labels span {lo}..={hi} but {missing:?} never occur")));
    }
    // A single observed class still yields a two-class problem.
    Ok((raw.iter().map(|&y| (y - lo) as usize).collect(), span.max(2)))
}

/// Scales every column to `[0, 1]`; constant columns become 0.
pub fn normalize_min_max(features: &mut [f64], dim: usize) {
    for j in 0..dim {
        let col = features.iter().skip(j).step_by(dim);
        let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let width = hi - lo;
        for x in features.iter_mut().skip(j).step_by(dim) {
            *x = if width > 0.0 { (*x - lo) / width } else { 0.0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header() {
        let d = parse_csv("y,x1,x2\n0,1,5\n1,2,5\n0,3,5\n", &LabelColumn::default()).unwrap();
        assert_eq!((d.num_samples(), d.dim(), d.num_classes()), (3, 2, 2));
        assert_eq!(d.row(1), &[0.5, 0.0]);
    }

    #[test]
    fn csv_first_column_label() {
        let d = parse_csv("cls,a\n3,1\n4,2\n5,0\n", &LabelColumn::First).unwrap();
        assert_eq!(d.labels(), &[0, 1, 2]);
        assert_eq!(d.num_classes(), 3);
    }

    #[test]
    fn csv_errors_carry_lines() {
        match parse_csv("y,x\n0,1\n1,abc\n", &LabelColumn::default()) {
            Err(DataError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("y,x\n0,1\n1\n", &LabelColumn::default()), Err(DataError::Format { line: 3, .. })));
        assert!(matches!(parse_csv("a,b\n0,1\n", &LabelColumn::default()), Err(DataError::Format { line: 1, .. })));
    }

    #[test]
    fn libsvm_densifies() {
        let d = parse_libsvm("1 3:0.5\n-1 1:2\n").unwrap();
        assert_eq!(d.dim(), 3);
        assert_eq!(d.labels(), &[1, 0]);
        // Column 3 has values {0.5, 0}: rescaled to {1, 0}.
        assert_eq!(d.row(0), &[0.0, 0.0, 1.0]);
        assert!(matches!(parse_libsvm("1 3:0.5\n2 x\n"), Err(DataError::Format { line: 2, .. })));
        assert!(matches!(parse_libsvm("1 3:1 2:1\n"), Err(DataError::Format { line: 1, .. })));
    }

    #[test]
    fn label_gaps_are_errors() {
        assert!(matches!(map_labels(&[1, 3, 1]), Err(DataError::Label(_))));
        assert_eq!(map_labels(&[7, 5, 6]).unwrap(), (vec![2, 0, 1], 3));
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let mut f = vec![4.0, 1.0, 4.0, 2.0];
        normalize_min_max(&mut f, 2);
        assert_eq!(f, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bundled_fixture_shape() {
        let d = bundled_covtype();
        assert_eq!((d.num_samples(), d.dim(), d.num_classes()), (2000, 54, 7));
        assert!(d.features().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
