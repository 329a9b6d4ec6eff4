//! CSV dataset loading and writing.
//!
//! The file has a header row. One column holds the class label; every other
//! column is a numeric feature. Line numbers in errors count the header as
//! line 1.

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// How to read the label column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpec {
    pub column: String,
    /// Value mapped to `+1`. The single other value maps to `-1`.
    pub positive: String,
}

impl Default for LabelSpec {
    fn default() -> Self {
        Self {
            column: "label".into(),
            positive: "1".into(),
        }
    }
}

fn same_label(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    matches!((a.parse::<f64>(), b.parse::<f64>()), (Ok(x), Ok(y)) if x == y)
}

pub fn load_dataset(path: &Path, spec: &LabelSpec) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, spec, path)
}

/// Parses CSV text; `path` is only used in error messages.
pub fn parse_dataset(text: &str, spec: &LabelSpec, path: &Path) -> Result<DataMatrix> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    let label_col = header
        .iter()
        .position(|h| h == spec.column)
        .ok_or_else(|| perr(1, format!("label column '{}' not found", spec.column)))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_col)
        .map(|(_, h)| h.to_string())
        .collect();
    if names.is_empty() {
        return Err(perr(1, "no feature columns".into()));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(perr(1, format!("duplicate feature name '{dup}'")));
    }

    let mut cells = Vec::new();
    let mut labels = Vec::new();
    let mut negative: Option<String> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            perr(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(perr(line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        for (i, field) in record.iter().enumerate() {
            if i == label_col {
                let y = if same_label(field, &spec.positive) {
                    1.0
                } else {
                    match &negative {
                        None => {
                            negative = Some(field.to_string());
                            -1.0
                        }
                        Some(neg) if same_label(field, neg) => -1.0,
                        Some(neg) => {
                            return Err(perr(
                                line,
                                format!(
                                    "third label value '{field}' (classes are '{}' and '{neg}')",
                                    spec.positive
                                ),
                            ))
                        }
                    }
                };
                labels.push(y);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| perr(line, format!("column '{}': non-numeric value '{field}'", &header[i])))?;
                if !v.is_finite() {
                    return Err(perr(line, format!("column '{}': non-finite value '{field}'", &header[i])));
                }
                cells.push(v);
            }
        }
    }
    let m = labels.len();
    let values = Array2::from_shape_vec((m, names.len()), cells).map_err(|e| Error::Data(e.to_string()))?;
    DataMatrix::new(values, Array1::from(labels), names)
}

/// Writes a dataset with the label column first, labels as `1` / `-1`.
///
/// Values use the shortest representation that parses back exactly.
pub fn save_dataset(data: &DataMatrix, path: &Path, label_column: &str) -> Result<()> {
    let io = |e: csv::Error| Error::Data(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec![label_column.to_string()];
    header.extend(data.feature_names().iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (row, &y) in data.values().rows().into_iter().zip(data.labels()) {
        let mut rec = vec![if y > 0.0 { "1".to_string() } else { "-1".to_string() }];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Summary printed by `validate-data`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    pub constant_features: Vec<String>,
}

pub fn summarize(data: &DataMatrix) -> DatasetSummary {
    let (n_positive, n_negative) = data.class_counts();
    let constant_features = (0..data.n_features())
        .filter(|&j| {
            let c = data.column(j);
            c.iter().all(|&v| v == c[0])
        })
        .map(|j| data.feature_names()[j].clone())
        .collect();
    DatasetSummary {
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        n_positive,
        n_negative,
        constant_features,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DataMatrix> {
        parse_dataset(text, &LabelSpec::default(), Path::new("t.csv"))
    }

    #[test]
    fn reads_label_anywhere() {
        let d = parse("a,label,b\n1.5,1,2\n0,0,-1\n").unwrap();
        assert_eq!(d.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.labels().to_vec(), vec![1.0, -1.0]);
        assert_eq!(d.values()[[0, 1]], 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("a,label\n1,1\nx,0\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("non-numeric"));
            }
            other => panic!("{other:?}"),
        }
        match parse("a,label\n1,1\n2,0\n3,2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("a,a,label\n1,2,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a,b\n1,2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("a,label\n1,1\n2\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn numeric_label_equivalence() {
        let d = parse("a,label\n1,1.0\n2,-1\n3,1\n").unwrap();
        assert_eq!(d.labels().to_vec(), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = parse("x,y,label\n0.1,1e-300,1\n-3.3333333333333335,7,0\n").unwrap();
        save_dataset(&d, &p, "label").unwrap();
        let back = load_dataset(&p, &LabelSpec::default()).unwrap();
        assert_eq!(back, d);
    }
}
