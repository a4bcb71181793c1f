//! Time grids and tabulated observable records.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Uniform grid `t_start, t_start + dt, …, t_end` with `steps + 1` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        let grid = Self { t_start, t_end, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_start.is_finite() || !self.t_end.is_finite() || self.t_end <= self.t_start {
            return Err(Error::Parameter(format!(
                "time grid needs t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.steps == 0 {
            return Err(Error::Parameter("time grid needs at least one step".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Warning text when `dt` exceeds `0.1 / rate_scale`.
    pub fn stability_warning(&self, rate_scale: f64) -> Option<String> {
        let dt = self.dt();
        (rate_scale > 0.0 && dt > 0.1 / rate_scale).then(|| {
            format!(
                "dt = {dt:.3e} exceeds 0.1/{rate_scale:.3e} = {:.3e}; resolution of fast dynamics may be poor",
                0.1 / rate_scale
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum ColumnData {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Real(v) => v.len(),
            ColumnData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// Sample times plus named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    /// Non-fatal diagnostics collected while producing the series.
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Self {
        Self { times, columns: Vec::new(), warnings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, name: &str, data: ColumnData) -> Result<()> {
        if data.len() != self.times.len() {
            return Err(Error::Shape(format!(
                "column '{name}' has {} samples, series has {}",
                data.len(),
                self.times.len()
            )));
        }
        if self.column(name).is_some() {
            return Err(Error::Parameter(format!("duplicate column '{name}'")));
        }
        self.columns.push(Column { name: name.to_string(), data });
        Ok(())
    }

    pub fn push_real(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        self.push(name, ColumnData::Real(values))
    }

    pub fn push_complex(&mut self, name: &str, values: Vec<C64>) -> Result<()> {
        self.push(name, ColumnData::Complex(values))
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|c| c.name == name).map(|c| &c.data)
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        match self.column(name)? {
            ColumnData::Real(v) => Some(v),
            ColumnData::Complex(_) => None,
        }
    }

    pub fn complex(&self, name: &str) -> Option<&[C64]> {
        match self.column(name)? {
            ColumnData::Complex(v) => Some(v),
            ColumnData::Real(_) => None,
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }

    /// Header names as written by [`TimeSeries::write_csv`].
    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["t".to_string()];
        for col in &self.columns {
            match col.data {
                ColumnData::Real(_) => header.push(col.name.clone()),
                ColumnData::Complex(_) => {
                    header.push(format!("{}_re", col.name));
                    header.push(format!("{}_im", col.name));
                }
            }
        }
        header
    }

    /// CSV with a `t` column first; complex columns split into `_re`/`_im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.csv_header().join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            write!(out, "{t:.16e}")?;
            for col in &self.columns {
                match &col.data {
                    ColumnData::Real(v) => write!(out, ",{:.16e}", v[k])?,
                    ColumnData::Complex(v) => write!(out, ",{:.16e},{:.16e}", v[k].re, v[k].im)?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(dt: f64, values: &[f64]) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}
