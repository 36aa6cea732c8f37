use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{AmpcError, Result};
use crate::numerics::RealMatrix;
use crate::rng;

/// A raw table: numeric features plus one label column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTable {
    pub feature_names: Vec<String>,
    pub features: RealMatrix,
    pub labels: Vec<f64>,
}

impl LabeledTable {
    pub fn new(feature_names: Vec<String>, features: RealMatrix, labels: Vec<f64>) -> Result<Self> {
        if features.rows() != labels.len() || feature_names.len() != features.cols() {
            return Err(AmpcError::Dataset(format!(
                "{} rows / {} names for a {}x{} feature matrix",
                labels.len(),
                feature_names.len(),
                features.rows(),
                features.cols()
            )));
        }
        Ok(Self { feature_names, features, labels })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Reads a CSV with a header row. `label_column` names the target; every
/// other column is a numeric feature. Non-numeric cells are an error.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_at = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| AmpcError::Dataset(format!("{}: no column named '{label_column}'", path.display())))?;
    let feature_names: Vec<String> =
        header.iter().enumerate().filter(|(i, _)| *i != label_at).map(|(_, h)| h.clone()).collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // Row numbers are 1-based and count the header line.
        let line = r + 2;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                AmpcError::Dataset(format!("{}: row {line}, column '{}': '{cell}' is not numeric", path.display(), header[c]))
            })?;
            if !v.is_finite() {
                return Err(AmpcError::Dataset(format!("{}: row {line}, column '{}': non-finite value", path.display(), header[c])));
            }
            if c == label_at {
                labels.push(v);
            } else {
                data.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(AmpcError::Dataset(format!("{}: no data rows", path.display())));
    }
    let features = RealMatrix::new(labels.len(), feature_names.len(), data)?;
    LabeledTable::new(feature_names, features, labels)
}

/// Deterministic shuffle-and-split; the test part has
/// round(rows·test_fraction) rows.
pub fn train_test_split(table: &LabeledTable, test_fraction: f64, seed: u64) -> Result<(LabeledTable, LabeledTable)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(AmpcError::invalid(format!("test fraction must be in [0, 1), got {test_fraction}")));
    }
    let mut idx: Vec<usize> = (0..table.rows()).collect();
    idx.shuffle(&mut rng::derive(seed, &[rng::label_hash("split")]));
    let n_test = (table.rows() as f64 * test_fraction).round() as usize;
    let (test, train) = idx.split_at(n_test);
    Ok((table.select(train), table.select(test)))
}

/// Per-feature affine map z = (x − mean) / scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalization {
    /// Standardization scaled by 1/√n so a typical row has unit norm.
    pub fn fit(x: &RealMatrix) -> Self {
        let (m, n) = x.shape();
        let mut mean = vec![0.0; n];
        let mut scale = vec![0.0; n];
        for c in 0..n {
            let col: Vec<f64> = (0..m).map(|r| x.get(r, c)).collect();
            let mu = col.iter().sum::<f64>() / m as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m as f64;
            mean[c] = mu;
            let sd = var.sqrt();
            scale[c] = if sd > 0.0 { sd * (n as f64).sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    /// Entry-wise average of several fitted maps.
    pub fn average(parts: &[Normalization]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| AmpcError::invalid("nothing to average"))?;
        let k = parts.len() as f64;
        let avg = |f: fn(&Normalization) -> &Vec<f64>| -> Vec<f64> {
            (0..f(first).len()).map(|c| parts.iter().map(|p| f(p)[c]).sum::<f64>() / k).collect()
        };
        Ok(Self { mean: avg(|p| &p.mean), scale: avg(|p| &p.scale) })
    }

    /// Applies the map and clips every row to L2 norm `bound`.
    pub fn apply_clipped(&self, x: &RealMatrix, bound: f64) -> RealMatrix {
        let mut z = RealMatrix::from_fn(x.rows(), x.cols(), |r, c| (x.get(r, c) - self.mean[c]) / self.scale[c]);
        clip_rows(&mut z, bound);
        z
    }
}

fn clip_rows(x: &mut RealMatrix, bound: f64) {
    for r in 0..x.rows() {
        let norm = x.row(r).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > bound {
            let f = bound / norm;
            for c in 0..x.cols() {
                x.set(r, c, x.get(r, c) * f);
            }
        }
    }
}

/// One client's preprocessed training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: RealMatrix,
    pub labels: Vec<f64>,
    pub normalization: Option<Normalization>,
    pub record_bound: f64,
}

impl Dataset {
    /// Wraps already-bounded data; every row must satisfy ‖x‖ ≤ `record_bound`.
    pub fn new(features: RealMatrix, labels: Vec<f64>, record_bound: f64) -> Result<Self> {
        if features.rows() != labels.len() || labels.is_empty() {
            return Err(AmpcError::Dataset(format!("{} labels for {} rows", labels.len(), features.rows())));
        }
        if !(record_bound > 0.0 && record_bound.is_finite()) {
            return Err(AmpcError::invalid(format!("record bound must be positive, got {record_bound}")));
        }
        for r in 0..features.rows() {
            let norm = features.row(r).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > record_bound * (1.0 + 1e-12) {
                return Err(AmpcError::Dataset(format!("row {r} has norm {norm} > record bound {record_bound}")));
            }
        }
        Ok(Self { features, labels, normalization: None, record_bound })
    }

    /// Normalizes locally (see [`Normalization::fit`]) and clips rows.
    pub fn normalized(features: &RealMatrix, labels: Vec<f64>, record_bound: f64) -> Result<Self> {
        let norm = Normalization::fit(features);
        let mut ds = Self::new(norm.apply_clipped(features, record_bound), labels, record_bound)?;
        ds.normalization = Some(norm);
        Ok(ds)
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn cols(&self) -> usize {
        self.features.cols()
    }

    /// Clips labels into [−bound, bound] so they obey the same record
    /// bound as features; returns how many changed.
    pub fn clip_labels(&mut self, bound: f64) -> usize {
        let mut n = 0;
        for y in &mut self.labels {
            let c = y.clamp(-bound, bound);
            n += usize::from(c != *y);
            *y = c;
        }
        n
    }
}

/// Splits rows evenly across `n_clients` in order and normalizes each part
/// locally. Returns the datasets and, if rows had to be dropped, a warning.
pub fn split_clients(table: &LabeledTable, n_clients: usize, record_bound: f64) -> Result<(Vec<Dataset>, Option<String>)> {
    if n_clients == 0 {
        return Err(AmpcError::invalid("need at least one client"));
    }
    let m = table.rows() / n_clients;
    if m == 0 {
        return Err(AmpcError::Dataset(format!("{} rows cannot be split across {n_clients} clients", table.rows())));
    }
    let dropped = table.rows() - m * n_clients;
    let warning = (dropped > 0).then(|| {
        format!("{} rows not divisible by {n_clients} clients; dropping the trailing {dropped}", table.rows())
    });
    let parts = (0..n_clients)
        .map(|j| {
            let idx: Vec<usize> = (j * m..(j + 1) * m).collect();
            let part = table.select(&idx);
            Dataset::normalized(&part.features, part.labels, record_bound)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((parts, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn table(rows: usize) -> LabeledTable {
        let x = RealMatrix::from_fn(rows, 3, |r, c| (r * 3 + c) as f64 * 0.7 - 4.0);
        LabeledTable::new(vec!["a".into(), "b".into(), "c".into()], x, (0..rows).map(|r| (r % 2) as f64).collect()).unwrap()
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x1,y,x2\n1.5,1,2\n-3,0,4e-1").unwrap();
        let t = load_csv(f.path(), "y").unwrap();
        assert_eq!(t.feature_names, vec!["x1", "x2"]);
        assert_eq!(t.features.data(), &[1.5, 2.0, -3.0, 0.4]);
        assert_eq!(t.labels, vec![1.0, 0.0]);
        assert!(matches!(load_csv(f.path(), "z"), Err(AmpcError::Dataset(_))));

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "x1,y\n1,0\nabc,1").unwrap();
        let msg = load_csv(bad.path(), "y").unwrap_err().to_string();
        assert!(msg.contains("row 3"), "{msg}");
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let t = table(50);
        let (a, b) = train_test_split(&t, 0.2, 4).unwrap();
        assert_eq!((a.rows(), b.rows()), (40, 10));
        assert_eq!(train_test_split(&t, 0.2, 4).unwrap(), (a.clone(), b.clone()));
        let mut all: Vec<f64> = a.features.data().iter().chain(b.features.data()).copied().collect();
        all.sort_by(f64::total_cmp);
        let mut want = t.features.data().to_vec();
        want.sort_by(f64::total_cmp);
        assert_eq!(all, want);
    }

    #[test]
    fn clients_get_equal_bounded_parts() {
        let (parts, warn) = split_clients(&table(23), 4, 1.0).unwrap();
        assert!(warn.unwrap().contains("dropping the trailing 3"));
        for p in &parts {
            assert_eq!(p.rows(), 5);
            for r in 0..p.rows() {
                assert!(p.features.row(r).iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 + 1e-12);
            }
        }
        assert!(split_clients(&table(20), 4, 1.0).unwrap().1.is_none());
    }

    #[test]
    fn labels_clip_to_bound() {
        let mut d = Dataset::new(RealMatrix::zeros(3, 1), vec![-2.0, 0.5, 1.5], 1.0).unwrap();
        assert_eq!(d.clip_labels(1.0), 2);
        assert_eq!(d.labels, vec![-1.0, 0.5, 1.0]);
    }

    #[test]
    fn out_of_bound_rows_are_rejected() {
        let x = RealMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert!(Dataset::new(x.clone(), vec![1.0], 4.9).is_err());
        assert!(Dataset::new(x, vec![1.0], 5.0).is_ok());
    }
}
