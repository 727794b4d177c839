//! Values of a scalar quantity on a (distance, time) mesh.

use std::collections::BTreeMap;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    delta_values: Vec<usize>,
    t_values: Vec<f64>,
    /// Row-major: `values[row * t_values.len() + col]`.
    values: Vec<f64>,
    meta: BTreeMap<String, String>,
}

/// Position of a contour line in one time column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Front {
    /// No row reaches the level.
    Absent,
    /// Front lies at or beyond the last row.
    Saturated,
    At(f64),
}

impl Front {
    pub fn position(self) -> Option<f64> {
        match self {
            Front::At(x) => Some(x),
            _ => None,
        }
    }
}

impl SpacetimeGrid {
    /// `delta_values` must be strictly ascending, `t_values` strictly
    /// ascending and nonnegative, `values` finite and nonnegative.
    pub fn new(
        delta_values: Vec<usize>,
        t_values: Vec<f64>,
        values: Vec<f64>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        if delta_values.is_empty() || t_values.is_empty() {
            return Err(Error::invalid(
                "grid needs at least one distance and one time",
            ));
        }
        if delta_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("distances must be strictly ascending"));
        }
        if t_values.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("times must be finite and nonnegative"));
        }
        if t_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("times must be strictly ascending"));
        }
        if values.len() != delta_values.len() * t_values.len() {
            return Err(Error::invalid(format!(
                "expected {}x{} values, got {}",
                delta_values.len(),
                t_values.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!(
                "grid value {v} is not finite and nonnegative"
            )));
        }
        Ok(SpacetimeGrid {
            delta_values,
            t_values,
            values,
            meta,
        })
    }

    pub fn delta_values(&self) -> &[usize] {
        &self.delta_values
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.meta
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn rows(&self) -> usize {
        self.delta_values.len()
    }

    pub fn cols(&self) -> usize {
        self.t_values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.values[row * c..(row + 1) * c]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest distance whose value reaches `level`, per time column.
    pub fn front(&self, level: f64) -> Vec<Option<usize>> {
        (0..self.cols())
            .map(|c| {
                (0..self.rows())
                    .rev()
                    .find(|&r| self.get(r, c) >= level)
                    .map(|r| self.delta_values[r])
            })
            .collect()
    }

    /// Contour position per time column, interpolated in `ln(value)` between
    /// the outermost row at or above `level` and the next row.
    pub fn contour_front(&self, level: f64) -> Vec<Front> {
        (0..self.cols())
            .map(|c| {
                let Some(r) = (0..self.rows()).rev().find(|&r| self.get(r, c) >= level) else {
                    return Front::Absent;
                };
                if r + 1 == self.rows() {
                    return Front::Saturated;
                }
                let (d0, d1) = (self.delta_values[r] as f64, self.delta_values[r + 1] as f64);
                let (v0, v1) = (self.get(r, c), self.get(r + 1, c));
                if v1 <= 0.0 {
                    return Front::At(d0);
                }
                let frac = (v0.ln() - level.ln()) / (v0.ln() - v1.ln());
                Front::At(d0 + (d1 - d0) * frac.clamp(0.0, 1.0))
            })
            .collect()
    }
}
