use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use super::{CiError, CiQuery, CiVerdict};

const R_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset needs at least one row, got {0}")]
    TooFewRows(usize),
    #[error("{names} column names for {cols} columns")]
    Shape { names: usize, cols: usize },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Observational samples: one row per draw, one column per variable.
#[derive(Debug, Clone)]
pub struct Dataset {
    names: Vec<String>,
    values: DMatrix<f64>,
    corr: OnceLock<DMatrix<f64>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, values: DMatrix<f64>) -> Result<Self, DataError> {
        if values.nrows() < 1 {
            return Err(DataError::TooFewRows(values.nrows()));
        }
        if names.len() != values.ncols() {
            return Err(DataError::Shape {
                names: names.len(),
                cols: values.ncols(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DataError::DuplicateColumn(n.clone()));
            }
        }
        Ok(Self {
            names,
            values,
            corr: OnceLock::new(),
        })
    }

    /// Sample count.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Variable count.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Sample correlation matrix, computed on first use.
    pub fn correlation(&self) -> &DMatrix<f64> {
        self.corr.get_or_init(|| {
            let cov = self.covariance();
            let sd: Vec<f64> = (0..self.p()).map(|j| cov[(j, j)].sqrt()).collect();
            DMatrix::from_fn(self.p(), self.p(), |i, j| {
                if i == j {
                    1.0
                } else {
                    cov[(i, j)] / (sd[i] * sd[j])
                }
            })
        })
    }

    /// Unbiased sample covariance matrix.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.n() as f64;
        let means = self.values.row_mean();
        let mut centered = self.values.clone();
        for mut row in centered.row_iter_mut() {
            row -= &means;
        }
        (centered.transpose() * &centered) / (n - 1.0)
    }

    /// Reads a CSV whose header row holds the column names.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut flat = Vec::new();
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(DataError::Parse {
                    row: i + 1,
                    msg: format!("expected {} fields, found {}", names.len(), rec.len()),
                });
            }
            for field in rec.iter() {
                let v: f64 = field.parse().map_err(|_| DataError::Parse {
                    row: i + 1,
                    msg: format!("`{field}` is not a number"),
                })?;
                flat.push(v);
            }
            rows += 1;
        }
        let values = DMatrix::from_row_slice(rows, names.len(), &flat);
        Self::new(names, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for row in self.values.row_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fisher-z test of `a ⟂ b | s` from the partial correlation read off the
/// inverse of the correlation block over `{a, b} ∪ s`.
pub fn fisher_z_test(data: &Dataset, q: &CiQuery, alpha: f64) -> Result<CiVerdict, CiError> {
    let size = q.s().len();
    let n = data.n();
    if n < size + 4 {
        return Err(CiError::InsufficientSamples { size, n });
    }
    let corr = data.correlation();
    let idx: Vec<usize> = [q.a(), q.b()].into_iter().chain(q.s().iter().copied()).collect();
    let singular = || {
        let cols: Vec<&str> = idx.iter().map(|&i| data.names()[i].as_str()).collect();
        CiError::Singular(cols.join(", "))
    };
    let r = if size == 0 {
        corr[(q.a(), q.b())]
    } else {
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| corr[(idx[i], idx[j])]);
        let prec = block.try_inverse().ok_or_else(singular)?;
        -prec[(0, 1)] / (prec[(0, 0)] * prec[(1, 1)]).sqrt()
    };
    if !r.is_finite() {
        return Err(singular());
    }
    let r = r.clamp(-R_CLAMP, R_CLAMP);
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    let statistic = ((n - size - 3) as f64).sqrt() * z.abs();
    let normal = Normal::standard();
    let critical = normal.inverse_cdf(1.0 - alpha / 2.0);
    let p_value = 2.0 * (1.0 - normal.cdf(statistic));
    Ok(CiVerdict {
        independent: statistic <= critical,
        statistic: Some(statistic),
        p_value: Some(p_value.clamp(0.0, 1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(cols: &[&[f64]]) -> Dataset {
        let n = cols[0].len();
        let names = (0..cols.len()).map(|i| format!("V{i}")).collect();
        Dataset::new(names, DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])).unwrap()
    }

    #[test]
    fn identical_columns_are_dependent() {
        let a = [0.1, 0.5, -0.3, 2.0, 1.1, -0.7];
        let d = dataset(&[&a, &a]);
        let v = fisher_z_test(&d, &CiQuery::new(0, 1, []).unwrap(), 0.05).unwrap();
        assert!(!v.independent);
        assert!(v.statistic.unwrap().is_finite());
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let a = [0.1, 0.5, -0.3, 2.0];
        let d = dataset(&[&a, &a, &a]);
        assert!(matches!(
            fisher_z_test(&d, &CiQuery::new(0, 1, [2]).unwrap(), 0.05),
            Err(CiError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn collinear_conditioning_block_is_reported() {
        let a = [0.1, 0.5, -0.3, 2.0, 1.1, -0.7, 0.4];
        let b = [1.0, -0.5, 0.3, 0.2, -1.1, 0.9, 0.0];
        let d = dataset(&[&a, &b, &a]);
        let err = fisher_z_test(&d, &CiQuery::new(0, 1, [2]).unwrap(), 0.05).unwrap_err();
        assert!(matches!(err, CiError::Singular(_)));
    }

    #[test]
    fn csv_round_trip() {
        let d = dataset(&[&[1.0, 2.5, -3.0], &[0.0, 0.25, 9.0]]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.names(), d.names());
        assert_eq!(back.values(), d.values());
    }

    #[test]
    fn malformed_csv_rejected() {
        let text = "A,B\n1,2\n3,x\n";
        assert!(matches!(
            Dataset::from_csv(text.as_bytes()),
            Err(DataError::Parse { row: 2, .. })
        ));
    }
}
