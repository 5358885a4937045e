//! Numeric datasets with named columns.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major table of `f64` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    rows: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, rows: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * names.len() {
            return Err(Error::arg(format!(
                "{} values do not fill {rows} rows of {} columns",
                values.len(),
                names.len()
            )));
        }
        Ok(Self {
            names,
            rows,
            values,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Sample covariance matrix (divisor `rows - 1`).
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let (n, p) = (self.rows, self.cols());
        if n < 2 {
            return Err(Error::DegenerateData(format!(
                "{n} rows cannot give a covariance"
            )));
        }
        let m = DMatrix::from_row_slice(n, p, &self.values);
        let means = m.row_mean();
        let mut centered = m;
        for mut row in centered.row_iter_mut() {
            row -= &means;
        }
        Ok(centered.transpose() * &centered / (n as f64 - 1.0))
    }

    /// Reads a CSV file with a header row of column names.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let names: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        let mut values = Vec::new();
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != names.len() {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("expected {} fields, found {}", names.len(), rec.len()),
                });
            }
            for field in rec.iter() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("`{field}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: i + 2,
                        message: format!("non-finite value `{field}`"),
                    });
                }
                values.push(v);
            }
            rows += 1;
        }
        Self::new(names, rows, values)
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in 0..self.rows {
            w.write_record((0..self.cols()).map(|c| self.get(r, c).to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
