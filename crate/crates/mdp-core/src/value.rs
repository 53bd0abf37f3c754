//! Value tables keyed by a state prefix shape.

use std::fmt::Write as _;

use crate::error::{MdpError, Result};
use crate::space::StateSpace;

/// A table of real values over joint states or a leading state prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    /// Sizes of the covered layers (a leading prefix of the state space).
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(space: &StateSpace, prefix_len: usize) -> Self {
        let dims = space.sizes()[..prefix_len].to_vec();
        let n = dims.iter().product::<usize>().max(1);
        Self {
            dims,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expect = dims.iter().product::<usize>().max(1);
        if values.len() != expect {
            return Err(MdpError::InvalidIndex(format!(
                "value table of shape {dims:?} needs {expect} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn prefix_len(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn set(&mut self, flat: usize, v: f64) {
        self.values[flat] = v;
    }

    pub fn at(&self, coords: &[usize]) -> f64 {
        debug_assert_eq!(coords.len(), self.dims.len());
        let idx = coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &n)| acc * n + c);
        self.values[idx]
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV dump: one column per covered state coordinate plus `value`,
    /// reals with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for l in 0..self.dims.len() {
            let _ = write!(out, "s{},", l + 1);
        }
        out.push_str("value\n");
        let mut coords = vec![0usize; self.dims.len()];
        for (i, v) in self.values.iter().enumerate() {
            decode(i, &self.dims, &mut coords);
            for c in &coords {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{}", fmt_real(*v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| MdpError::InvalidIndex("empty value table csv".into()))?;
        let cols = header.split(',').count();
        if cols < 1 {
            return Err(MdpError::InvalidIndex("value table csv without columns".into()));
        }
        let ncoord = cols - 1;
        let mut rows: Vec<(Vec<usize>, f64)> = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(MdpError::InvalidIndex(format!("bad csv row: {line}")));
            }
            let coords = fields[..ncoord]
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| MdpError::InvalidIndex(format!("bad coordinate in '{line}': {e}")))?;
            let v = fields[ncoord]
                .parse::<f64>()
                .map_err(|e| MdpError::InvalidIndex(format!("bad value in '{line}': {e}")))?;
            rows.push((coords, v));
        }
        let mut dims = vec![0usize; ncoord];
        for (coords, _) in &rows {
            for (d, &c) in dims.iter_mut().zip(coords) {
                *d = (*d).max(c + 1);
            }
        }
        let total = dims.iter().product::<usize>().max(1);
        if rows.len() != total {
            return Err(MdpError::InvalidIndex(format!(
                "value table csv covers {} of {total} states",
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; total];
        for (coords, v) in rows {
            let idx = coords.iter().zip(&dims).fold(0, |acc, (&c, &n)| acc * n + c);
            values[idx] = v;
        }
        Self::from_values(dims, values)
    }
}

fn decode(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (c, &n) in out.iter_mut().zip(dims).rev() {
        *c = index % n;
        index /= n;
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let space = StateSpace::new(vec![2, 3]).unwrap();
        let mut t = ValueTable::zeros(&space, 2);
        for (i, v) in t.values_mut().iter_mut().enumerate() {
            *v = (i as f64 + 0.1).sin() * 1e3 / 7.0;
        }
        let back = ValueTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn scalar_table_has_one_entry() {
        let space = StateSpace::new(vec![4, 5]).unwrap();
        let t = ValueTable::zeros(&space, 0);
        assert_eq!(t.len(), 1);
    }
}
