//! Dataset representation, CSV ingestion, and the pooled standardization the
//! priors assume.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Observation matrix with a pseudo-time group label per sample row.
///
/// Rows are samples, columns are nodes. Time labels are contiguous 1..=T;
/// every group is non-empty and all values finite. Immutable after
/// construction.
#[derive(Clone, Debug)]
pub struct PseudoTimeDataset {
    values: Array2<f64>,
    time_labels: Vec<usize>,
    node_names: Vec<String>,
    n_times: usize,
    rows_by_time: Vec<Vec<usize>>,
    label_map: Vec<(i64, usize)>,
}

impl PseudoTimeDataset {
    /// Validates and builds a dataset. Raw labels must be >= 1; ordered
    /// distinct labels are re-mapped onto 1..=T and the mapping recorded.
    pub fn new(values: Array2<f64>, raw_labels: Vec<i64>, node_names: Vec<String>) -> Result<Self> {
        let n = values.nrows();
        if raw_labels.len() != n {
            return Err(Error::Validation(format!(
                "{} time labels for {} rows",
                raw_labels.len(),
                n
            )));
        }
        if n == 0 || values.ncols() == 0 {
            return Err(Error::Validation("dataset must be non-empty".into()));
        }
        if node_names.len() != values.ncols() {
            return Err(Error::Validation(format!(
                "{} node names for {} columns",
                node_names.len(),
                values.ncols()
            )));
        }
        for (i, name) in node_names.iter().enumerate() {
            if name.is_empty() || name.contains(',') || name.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!(
                    "node name {i} ({name:?}) must be non-empty without commas or whitespace"
                )));
            }
            if node_names[..i].contains(name) {
                return Err(Error::Validation(format!("duplicate node name {name:?}")));
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite value {bad} in dataset")));
        }
        if let Some(&bad) = raw_labels.iter().find(|&&l| l < 1) {
            return Err(Error::Validation(format!(
                "time label {bad}: labels must be 1-based contiguous"
            )));
        }
        let mut distinct: Vec<i64> = raw_labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let n_times = distinct.len();
        let label_map: Vec<(i64, usize)> = distinct
            .iter()
            .enumerate()
            .map(|(i, &raw)| (raw, i + 1))
            .collect();
        let time_labels: Vec<usize> = raw_labels
            .iter()
            .map(|raw| distinct.binary_search(raw).expect("label present") + 1)
            .collect();
        let mut rows_by_time = vec![Vec::new(); n_times];
        for (row, &t) in time_labels.iter().enumerate() {
            rows_by_time[t - 1].push(row);
        }
        if let Some(empty) = rows_by_time.iter().position(|r| r.is_empty()) {
            return Err(Error::Validation(format!("time group {} is empty", empty + 1)));
        }
        Ok(Self {
            values,
            time_labels,
            node_names,
            n_times,
            rows_by_time,
            label_map,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_nodes(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    /// Samples per group, indexed by t-1.
    pub fn group_sizes(&self) -> Vec<usize> {
        self.rows_by_time.iter().map(Vec::len).collect()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn time_labels(&self) -> &[usize] {
        &self.time_labels
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    /// Row indices belonging to time group `t` (1-based).
    pub fn rows_at(&self, t: usize) -> &[usize] {
        &self.rows_by_time[t - 1]
    }

    /// Original-label to internal-label mapping recorded at ingestion.
    pub fn label_map(&self) -> &[(i64, usize)] {
        &self.label_map
    }

    /// A single time group as its own dataset (all labels become 1), for
    /// fitting time slices independently.
    pub fn time_slice(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.n_times {
            return Err(Error::InvalidParameter(format!(
                "time group {t} out of range 1..={}",
                self.n_times
            )));
        }
        let rows = self.rows_at(t);
        let mut values = Array2::zeros((rows.len(), self.n_nodes()));
        for (out_row, &row) in rows.iter().enumerate() {
            values.row_mut(out_row).assign(&self.values.row(row));
        }
        Self::new(values, vec![1; rows.len()], self.node_names.clone())
    }

    /// Centers every column to mean 0 and scales to sample variance 1,
    /// pooled over all rows. Time-group structure and row order are
    /// untouched; a near-constant column is an error naming the column.
    pub fn standardize(&self) -> Result<Self> {
        let n = self.n_samples() as f64;
        let mut values = self.values.clone();
        for (j, name) in self.node_names.iter().enumerate() {
            let mut col = values.column_mut(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 1e-12 {
                return Err(Error::DegenerateColumn(name.clone()));
            }
            let sd = var.sqrt();
            col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
        }
        Ok(Self {
            values,
            time_labels: self.time_labels.clone(),
            node_names: self.node_names.clone(),
            n_times: self.n_times,
            rows_by_time: self.rows_by_time.clone(),
            label_map: self.label_map.clone(),
        })
    }
}

/// Reads the dataset CSV: header `time,<node>,...`, one integer time label
/// and one finite value per node per row.
pub fn load_dataset<P: AsRef<Path>>(path: P) -> Result<PseudoTimeDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0) != Some("time") {
        return Err(Error::Format(
            "first CSV column must be `time`".into(),
        ));
    }
    let node_names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    if node_names.is_empty() {
        return Err(Error::Format("no node columns in CSV".into()));
    }
    let mut labels = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != node_names.len() + 1 {
            return Err(Error::Format(format!(
                "row {}: expected {} fields, found {}",
                line + 2,
                node_names.len() + 1,
                record.len()
            )));
        }
        let t: i64 = record[0].parse().map_err(|_| {
            Error::Format(format!("row {}: non-integer time label {:?}", line + 2, &record[0]))
        })?;
        labels.push(t);
        for (j, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Format(format!(
                    "row {}, column {:?}: non-numeric cell {:?}",
                    line + 2,
                    node_names[j],
                    field
                ))
            })?;
            rows.push(v);
        }
    }
    let n = labels.len();
    let values = Array2::from_shape_vec((n, node_names.len()), rows)
        .map_err(|e| Error::Format(e.to_string()))?;
    PseudoTimeDataset::new(values, labels, node_names)
}

/// Writes the CSV contract back out; floats go through the shortest
/// round-trip representation, so save -> load is bit-exact.
pub fn save_dataset<P: AsRef<Path>>(ds: &PseudoTimeDataset, path: P) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["time".to_owned()];
    header.extend(ds.node_names().iter().cloned());
    writer.write_record(&header)?;
    for (row, &t) in ds.time_labels().iter().enumerate() {
        let mut record = vec![t.to_string()];
        record.extend(ds.values().row(row).iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
