use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::fock::C64;
use crate::output::{Cell, Metadata, Table};

/// Uniform sampling `t_k = t_start + k (t_end − t_start)/(samples − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, samples: usize) -> Result<Self, DynamicsError> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) || samples < 2 {
            return Err(DynamicsError::InvalidConfig(format!(
                "time grid needs t_end > t_start and at least 2 samples (got [{t_start}, {t_end}], {samples})"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            samples,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.samples - 1) as f64
    }

    /// Sample `k`; the last one is `t_end` exactly.
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.samples {
            self.t_end
        } else {
            self.t_start + k as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.time(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Track {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl Track {
    pub fn len(&self) -> usize {
        match self {
            Track::Real(v) => v.len(),
            Track::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named observable tracks on a common time grid, kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: TimeGrid,
    tracks: Vec<(String, Track)>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            grid,
            tracks: Vec::new(),
        }
    }

    pub fn push_real(&mut self, name: &str, values: Vec<f64>) {
        self.push(name, Track::Real(values));
    }

    pub fn push_complex(&mut self, name: &str, values: Vec<C64>) {
        self.push(name, Track::Complex(values));
    }

    fn push(&mut self, name: &str, track: Track) {
        assert_eq!(track.len(), self.grid.samples, "track {name} has the wrong length");
        assert!(self.track(name).is_none(), "duplicate track {name}");
        self.tracks.push((name.to_string(), track));
    }

    pub fn track(&self, name: &str) -> Option<&Track> {
        self.tracks.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        match self.track(name)? {
            Track::Real(v) => Some(v),
            Track::Complex(_) => None,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tracks.iter().map(|(n, _)| n.as_str())
    }

    /// Column names after splitting complex tracks.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for (name, track) in &self.tracks {
            match track {
                Track::Real(_) => cols.push(name.clone()),
                Track::Complex(_) => {
                    cols.push(format!("{name}_re"));
                    cols.push(format!("{name}_im"));
                }
            }
        }
        cols
    }

    pub fn to_table(&self, metadata: Metadata) -> Table {
        let cols = self.columns();
        let names: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut table = Table::new(metadata, &names);
        for k in 0..self.grid.samples {
            let mut row = vec![Cell::Real(self.grid.time(k))];
            for (_, track) in &self.tracks {
                match track {
                    Track::Real(v) => row.push(Cell::Real(v[k])),
                    Track::Complex(v) => {
                        row.push(Cell::Real(v[k].re));
                        row.push(Cell::Real(v[k].im));
                    }
                }
            }
            table.push(row);
        }
        table
    }

    pub fn to_csv(&self, metadata: Metadata) -> String {
        self.to_table(metadata).to_csv()
    }
}
