//! Points and datasets. A dataset's point order is its arrival order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in R^d with finite coordinates, d >= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point must have dimension >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean norm, used by norm-based arrival orderings.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// An ordered list of points; the order is the arrival order. Labels, when
/// present, record the generating mixture component of each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<Point>,
    labels: Option<Vec<usize>>,
    seed: Option<u64>,
}

impl Dataset {
    pub fn new(points: Vec<Point>, labels: Option<Vec<usize>>, seed: Option<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("dataset must contain at least one point"));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::invalid("all points must share one dimension"));
        }
        if let Some(ls) = &labels {
            if ls.len() != points.len() {
                return Err(Error::invalid("labels must have one entry per point"));
            }
        }
        Ok(Dataset {
            points,
            labels,
            seed,
        })
    }

    /// Build a 1-D dataset from raw values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let points = values
            .iter()
            .map(|&v| Point::scalar(v))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(points, None, None)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn into_parts(self) -> (Vec<Point>, Option<Vec<usize>>, Option<u64>) {
        (self.points, self.labels, self.seed)
    }

    /// Read the CSV dataset format: header `x0,x1,...` with an optional final
    /// `label` column, one point per row. Ragged rows are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            return Err(Error::invalid("csv header row is empty"));
        }
        let has_label = headers.iter().next_back() == Some("label");
        let dim = if has_label {
            headers.len() - 1
        } else {
            headers.len()
        };
        if dim == 0 {
            return Err(Error::invalid("csv has no coordinate columns"));
        }

        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths { .. } => {
                    Error::invalid(format!("ragged csv row {}", row_idx + 2))
                }
                _ => Error::Csv(e),
            })?;
            let mut coords = Vec::with_capacity(dim);
            for field in record.iter().take(dim) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::invalid(format!("bad coordinate {field:?} in row {}", row_idx + 2))
                })?;
                coords.push(v);
            }
            points.push(Point::new(coords)?);
            if has_label {
                let field = record.get(dim).unwrap_or("");
                let l: usize = field.parse().map_err(|_| {
                    Error::invalid(format!("bad label {field:?} in row {}", row_idx + 2))
                })?;
                labels.push(l);
            }
        }
        Dataset::new(points, if has_label { Some(labels) } else { None }, None)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        if self.labels.is_some() {
            header.push("label".to_string());
        }
        wtr.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
            if let Some(ls) = &self.labels {
                row.push(ls[i].to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
