//! CSV tables: per-row labels and scaling-law observations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use crate::{Error, Result};

const LABEL_HEADER: [&str; 2] = ["index", "label"];
const SCALING_HEADER: [&str; 5] = ["dataset", "N", "d_data", "k_f", "loss"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Csv { line, message: format!("{other:?}") },
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_path(path).map_err(|e| csv_error(path, e))
}

/// Labels from a CSV with header `index,label`, in file order.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().ne(LABEL_HEADER) {
        return Err(Error::MissingHeader {
            expected: LABEL_HEADER.join(","),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut seen = HashSet::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let index: u64 = rec[0]
            .parse()
            .map_err(|_| Error::Csv { line, message: format!("index {:?} is not a nonnegative integer", &rec[0]) })?;
        if !seen.insert(index) {
            return Err(Error::DuplicateIndex(index));
        }
        let label: i64 = rec[1].parse().map_err(|_| Error::NonIntegerLabel { line, value: rec[1].to_owned() })?;
        if label < 0 {
            return Err(Error::NegativeLabel { line, value: label });
        }
        labels.push(label as u64);
    }
    Ok(labels)
}

pub fn write_labels_csv(labels: &[u64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(LABEL_HEADER).map_err(|e| csv_error(path, e))?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One observed (training size, dataset properties, test loss) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub dataset: String,
    /// Training set size.
    pub n: u64,
    pub d_data: f64,
    pub k_f: f64,
    /// Test loss.
    pub loss: f64,
    pub d_repr: Option<f64>,
    /// Any further columns, usable for grouping.
    pub tags: BTreeMap<String, String>,
}

impl ScalingRecord {
    pub fn new(dataset: impl Into<String>, n: u64, d_data: f64, k_f: f64, loss: f64) -> Self {
        Self { dataset: dataset.into(), n, d_data, k_f, loss, d_repr: None, tags: BTreeMap::new() }
    }

    /// Value of a grouping column: `dataset` or an extra tag column.
    pub fn field(&self, name: &str) -> Option<&str> {
        if name == "dataset" {
            Some(&self.dataset)
        } else {
            self.tags.get(name).map(String::as_str)
        }
    }

    fn validate(&self, line: u64) -> Result<()> {
        if self.n == 0 {
            return Err(Error::NonPositiveField { field: "N", line });
        }
        if self.n < 2 {
            return Err(Error::Csv { line, message: "N must be at least 2".into() });
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        for (field, v) in [("d_data", self.d_data), ("k_f", self.k_f), ("loss", self.loss)] {
            if !positive(v) {
                return Err(Error::NonPositiveField { field, line });
            }
        }
        if self.d_repr.is_some_and(|d| !positive(d)) {
            return Err(Error::NonPositiveField { field: "d_repr", line });
        }
        Ok(())
    }
}

/// Records from a CSV whose header starts `dataset,N,d_data,k_f,loss`,
/// optionally followed by `d_repr` and extra tag columns in any order.
pub fn read_scaling_csv(path: impl AsRef<Path>) -> Result<Vec<ScalingRecord>> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < SCALING_HEADER.len() || headers.iter().take(5).ne(SCALING_HEADER) {
        return Err(Error::MissingHeader {
            expected: format!("{}[,d_repr]", SCALING_HEADER.join(",")),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let extra: Vec<(usize, &str)> = headers.iter().enumerate().skip(5).collect();

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let float = |i: usize, field: &str| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::Csv { line, message: format!("{field} {:?} is not a number", &rec[i]) })
        };
        let n = match rec[1].parse::<i64>() {
            Ok(n) if n <= 0 => return Err(Error::NonPositiveField { field: "N", line }),
            Ok(n) => n as u64,
            Err(_) => return Err(Error::Csv { line, message: format!("N {:?} is not an integer", &rec[1]) }),
        };
        let mut r = ScalingRecord::new(&rec[0], n, float(2, "d_data")?, float(3, "k_f")?, float(4, "loss")?);
        for &(i, name) in &extra {
            if name == "d_repr" {
                if !rec[i].is_empty() {
                    r.d_repr = Some(float(i, "d_repr")?);
                }
            } else if !rec[i].is_empty() {
                r.tags.insert(name.to_owned(), rec[i].to_owned());
            }
        }
        r.validate(line)?;
        out.push(r);
    }
    Ok(out)
}

/// Inverse of [`read_scaling_csv`]. `d_repr` is written when any record has
/// it; tag columns are the union over records, sorted by name.
pub fn write_scaling_csv(records: &[ScalingRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let with_repr = records.iter().any(|r| r.d_repr.is_some());
    let tags: BTreeSet<&str> = records.iter().flat_map(|r| r.tags.keys().map(String::as_str)).collect();

    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = SCALING_HEADER.to_vec();
    if with_repr {
        header.push("d_repr");
    }
    header.extend(tags.iter().copied());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in records {
        let mut row =
            vec![r.dataset.clone(), r.n.to_string(), r.d_data.to_string(), r.k_f.to_string(), r.loss.to_string()];
        if with_repr {
            row.push(r.d_repr.map(|d| d.to_string()).unwrap_or_default());
        }
        row.extend(tags.iter().map(|t| r.tags.get(*t).cloned().unwrap_or_default()));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
