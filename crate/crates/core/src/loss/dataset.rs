use std::io::{Read, Write};
use std::path::Path;

use crate::error::{PathError, Result};
use crate::{Matrix, Vector};

/// Design matrix with responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vector,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(PathError::Argument("dataset needs n >= 1 and p >= 1".into()));
        }
        if x.nrows() != y.len() {
            return Err(PathError::Argument(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        for (i, row) in x.row_iter().enumerate() {
            if row.iter().all(|v| v.is_nan()) {
                return Err(PathError::Argument(format!("row {i} of the design is all NaN")));
            }
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Checks that every response is exactly `+1` or `-1`.
    pub fn check_binary_labels(&self) -> Result<()> {
        match self.y.iter().position(|&v| v != 1.0 && v != -1.0) {
            None => Ok(()),
            Some(i) => Err(PathError::Argument(format!(
                "label {} at row {i} is not +1 or -1",
                self.y[i]
            ))),
        }
    }

    pub fn max_row_norm(&self) -> f64 {
        self.x.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// Writes `y,x1,...,xp` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["y".to_string()];
        header.extend((1..=self.p()).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.p() + 1);
        for i in 0..self.n() {
            record.clear();
            record.push(format!("{:.16e}", self.y[i]));
            record.extend(self.x.row(i).iter().map(|v| format!("{v:.16e}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("y") || header.len() < 2 {
            return Err(PathError::Config("dataset header must start with y,x1".into()));
        }
        let p = header.len() - 1;
        for j in 1..=p {
            if header.get(j) != Some(format!("x{j}").as_str()) {
                return Err(PathError::Config(format!("expected column x{j} in dataset header")));
            }
        }
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| PathError::Config(format!("bad number {s:?}: {e}")))
            };
            ys.push(parse(&rec[0])?);
            for j in 1..=p {
                xs.push(parse(&rec[j])?);
            }
        }
        let n = ys.len();
        Dataset::new(Matrix::from_row_slice(n, p, &xs), Vector::from_vec(ys))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let x = Matrix::from_row_slice(2, 3, &[0.1, -1.0 / 3.0, 1e-300, 2.5e10, std::f64::consts::PI, -0.0]);
        let y = Vector::from_vec(vec![1.0, -1.0]);
        let d = Dataset::new(x, y).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("y,x1,x2,x3\n"));
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_bad_shapes_and_labels() {
        assert!(Dataset::new(Matrix::zeros(2, 2), Vector::zeros(3)).is_err());
        let nan_row = Matrix::from_row_slice(1, 2, &[f64::NAN, f64::NAN]);
        assert!(Dataset::new(nan_row, Vector::zeros(1)).is_err());
        let d = Dataset::new(Matrix::zeros(2, 1), Vector::from_vec(vec![1.0, 0.5])).unwrap();
        assert!(d.check_binary_labels().is_err());
    }

    #[test]
    fn rejects_malformed_header() {
        let text = "y,z1\n1,2\n";
        assert!(Dataset::read_csv(text.as_bytes()).is_err());
    }
}
