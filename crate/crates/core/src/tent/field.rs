use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::TimeGrid;
use crate::error::{Error, Result};
use crate::operators::io::{degree_of_key, finite, Scalar};
use crate::operators::{GradedForm, GradedSpace};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A family `F(·, t_j)` of graded forms over a time grid.
///
/// Stored time-major: slice `j` is the graded form at `t_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    dims: Vec<usize>,
    grid: TimeGrid,
    cells: usize,
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(dims: &[usize], grid: &TimeGrid) -> Self {
        let cells = dims.iter().sum();
        Self { dims: dims.to_vec(), grid: grid.clone(), cells, values: vec![ZERO; cells * grid.len()] }
    }

    /// Builds a field from one form per grid point.
    pub fn from_slices(grid: &TimeGrid, slices: Vec<GradedForm>) -> Result<Self> {
        if slices.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let dims = slices.first().map(|f| f.dims().to_vec()).ok_or(Error::EmptyGrid)?;
        let mut out = Self::zeros(&dims, grid);
        for (j, f) in slices.into_iter().enumerate() {
            if f.dims() != dims.as_slice() {
                return Err(Error::ShapeMismatch("slices live on different complexes".into()));
            }
            out.slice_mut(j).copy_from_slice(f.values());
        }
        Ok(out)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Graded dimension of each time slice.
    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn num_times(&self) -> usize {
        self.grid.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn slice(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.cells..(j + 1) * self.cells]
    }

    pub fn slice_mut(&mut self, j: usize) -> &mut [Complex64] {
        let c = self.cells;
        &mut self.values[j * c..(j + 1) * c]
    }

    pub fn slice_form(&self, j: usize) -> GradedForm {
        GradedForm::from_values(&self.dims, self.slice(j).to_vec())
    }

    pub fn get(&self, cell: usize, j: usize) -> Complex64 {
        self.values[j * self.cells + cell]
    }

    pub fn set(&mut self, cell: usize, j: usize, v: Complex64) {
        self.values[j * self.cells + cell] = v;
    }

    /// Nonzero entries as `(cell, time index)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let c = self.cells;
        self.values.iter().enumerate().filter(|(_, v)| **v != ZERO).map(move |(idx, _)| (idx % c, idx / c))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `Σ_j w_j ‖F(·, t_j)‖²`.
    pub fn h_norm_sq(&self, space: &GradedSpace) -> f64 {
        (0..self.num_times()).map(|j| self.grid.weights()[j] * space.norm_sq_values(self.slice(j))).sum()
    }

    pub fn h_norm(&self, space: &GradedSpace) -> f64 {
        self.h_norm_sq(space).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &SpaceTimeField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &SpaceTimeField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch("fields live on different complexes".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    grid: TimeGrid,
    values: BTreeMap<String, Vec<Vec<Scalar>>>,
}

/// Parses `{"grid": {...}, "values": {"degree_k": [[cell × time]]}}`.
pub fn parse_field(text: &str, dims: &[usize]) -> Result<SpaceTimeField> {
    let file: FieldFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut out = SpaceTimeField::zeros(dims, &file.grid);
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    for (key, rows) in file.values {
        let k = degree_of_key(&key, dims)?;
        if rows.len() != dims[k] {
            return Err(Error::ShapeMismatch(format!("{key} has {} rows, expected {}", rows.len(), dims[k])));
        }
        for (c, row) in rows.into_iter().enumerate() {
            if row.len() != file.grid.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{key} row {c} has {} times, the grid has {}",
                    row.len(),
                    file.grid.len()
                )));
            }
            for (j, s) in row.into_iter().enumerate() {
                out.set(offsets[k] + c, j, finite(s.into())?);
            }
        }
    }
    Ok(out)
}

pub fn field_to_json(f: &SpaceTimeField) -> Result<String> {
    let mut values = BTreeMap::new();
    let mut offset = 0;
    for (k, &n) in f.dims().iter().enumerate() {
        let rows: Vec<Vec<Scalar>> =
            (offset..offset + n).map(|c| (0..f.num_times()).map(|j| f.get(c, j).into()).collect()).collect();
        values.insert(format!("degree_{k}"), rows);
        offset += n;
    }
    Ok(serde_json::to_string(&FieldFile { grid: f.grid().clone(), values })?)
}

pub fn load_field(path: impl AsRef<Path>, dims: &[usize]) -> Result<SpaceTimeField> {
    parse_field(&std::fs::read_to_string(path)?, dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_shape_checks() {
        let grid = TimeGrid::new(0.5, 2.0, 1.0).unwrap();
        let mut f = SpaceTimeField::zeros(&[2, 1], &grid);
        f.set(2, 1, Complex64::new(1.0, -1.0));
        f.set(0, 0, Complex64::new(3.0, 0.0));
        let text = field_to_json(&f).unwrap();
        assert_eq!(parse_field(&text, &[2, 1]).unwrap(), f);
        assert!(matches!(parse_field(&text, &[3, 1]), Err(Error::ShapeMismatch(_))));
        assert!(parse_field("{\"grid\": 1}", &[2, 1]).is_err());
        assert_eq!(f.support().collect::<Vec<_>>(), vec![(0, 0), (2, 1)]);
    }
}
