//! Nodal scalar fields on the rectangle and on its slip boundary.

use crate::config::GridSpec;
use crate::error::{Error, Result};

fn check_values(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::Shape {
            expected,
            actual: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Nodal values on the full grid, stored row-major by `y` then `x`:
/// node `(i, j)` lives at `j * (nx + 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.node_count())?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..=grid.ny() {
            for i in 0..=grid.nx() {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Row `j` of nodal values (`nx + 1` entries).
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.nx() + 1;
        &self.values[j * n..(j + 1) * n]
    }

    /// Values on the slip boundary `y = 0`.
    pub fn slip_trace(&self) -> Profile1D {
        Profile1D {
            grid: self.grid,
            values: self.row(0).to_vec(),
        }
    }

    /// Values on the loaded boundary `y = H`.
    pub fn top_trace(&self) -> Profile1D {
        Profile1D {
            grid: self.grid,
            values: self.row(self.grid.ny()).to_vec(),
        }
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Nodal values on the slip boundary (`nx + 1` entries).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Profile1D {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.nx() + 1)?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            values: vec![value; grid.nx() + 1],
            grid,
        }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = (0..=grid.nx()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mirror image `x -> -x`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Composite trapezoid rule over `[-L, L]`.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx())
    }
}

/// Composite trapezoid rule for equally spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}
