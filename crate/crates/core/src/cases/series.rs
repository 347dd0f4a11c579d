use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use super::CaseError;
use crate::model::{TimeFn, TimeSeries};

/// Tabulated boundary data: a time column followed by named value columns,
/// interpolated linearly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySeries {
    pub time_column: String,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// `values[c][i]` is column `c` at `times[i]`.
    pub values: Vec<Vec<f64>>,
}

impl BoundarySeries {
    pub fn column_index(&self, name: &str) -> Result<usize, CaseError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| {
            CaseError::Config(format!(
                "series has no column '{name}' (available: {})",
                self.columns.join(", ")
            ))
        })
    }

    pub fn column(&self, name: &str) -> Result<TimeSeries, CaseError> {
        let c = self.column_index(name)?;
        Ok(TimeSeries::new(self.times.clone(), self.values[c].clone())?)
    }

    /// Linear interpolation of column `name` at time `t` (clamped at the ends).
    pub fn at(&self, name: &str, t: f64) -> Result<f64, CaseError> {
        Ok(self.column(name)?.at(t))
    }

    /// Time function `scale · column(t° · t*)` for a dimensionless run whose
    /// time unit is `time_unit` series time units.
    pub fn time_fn(&self, name: &str, time_unit: f64, scale: f64) -> Result<TimeFn, CaseError> {
        Ok(TimeFn::Series {
            series: Arc::new(self.column(name)?),
            time_scale: time_unit,
            value_scale: scale,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Fails unless the series covers `[0, tau]` (series time units).
    pub fn check_covers(&self, tau: f64) -> Result<(), CaseError> {
        let (a, b) = self.span();
        let tol = 1e-9 * tau.max(1.0);
        if a > tol || b < tau - tol {
            return Err(CaseError::Config(format!(
                "boundary series spans [{a}, {b}] but the run needs [0, {tau}]"
            )));
        }
        Ok(())
    }
}

/// Reads a boundary series from a CSV file (header row, numeric cells,
/// `#` comment lines, first column is time).
pub fn ingest_boundary_series(path: impl AsRef<Path>) -> Result<BoundarySeries, CaseError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CaseError::io(path, e))?;
    parse_boundary_series(file, &path.display().to_string())
}

/// Parses a boundary series from any reader; `source_name` labels errors.
pub fn parse_boundary_series<R: Read>(reader: R, source_name: &str) -> Result<BoundarySeries, CaseError> {
    let err = |line: usize, message: String| CaseError::Ingest {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header_line = rdr.position().line().max(1) as usize;
    let headers = rdr.headers().map_err(|e| err(header_line, format!("unreadable header: {e}")))?.clone();
    if headers.len() < 2 {
        return Err(err(header_line, "need a time column and at least one value column".into()));
    }
    let names: Vec<String> = headers.iter().map(str::to_string).collect();
    let mut times = Vec::new();
    let mut values = vec![Vec::new(); names.len() - 1];
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(err(line, format!("expected {} columns, found {}", names.len(), record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| err(line, format!("non-numeric value '{cell}' in column '{}'", names[c])))?;
            if c == 0 {
                if let Some(&prev) = times.last() {
                    if !(x > prev) {
                        return Err(err(line, format!("time {x} does not increase (previous {prev})")));
                    }
                }
                times.push(x);
            } else {
                values[c - 1].push(x);
            }
        }
    }
    if times.len() < 2 {
        return Err(err(0, format!("series needs at least two rows, found {}", times.len())));
    }
    Ok(BoundarySeries {
        time_column: names[0].clone(),
        columns: names[1..].to_vec(),
        times,
        values,
    })
}
