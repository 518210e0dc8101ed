//! Real scalar fields sampled on a torus grid, and grid L^p norms.

use crate::error::{HksError, Result};
use crate::grid::TorusGrid;

/// Real scalar field sampled on a [`TorusGrid`], stored row-major
/// (for dim = 2 the value at `(x_i, y_j)` lives at index `i * n + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HksError::InvalidGrid(format!(
                "value buffer length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Build a field by evaluating `f` at every grid point. The closure
    /// receives the point coordinates (second coordinate is 0 for dim = 1).
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        match grid.dim() {
            1 => {
                for i in 0..n {
                    values.push(f(grid.coord(i), 0.0));
                }
            }
            _ => {
                for i in 0..n {
                    let x = grid.coord(i);
                    for j in 0..n {
                        values.push(f(x, grid.coord(j)));
                    }
                }
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
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

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(HksError::DivergedInput)
        }
    }

    /// Grid mean, i.e. the k = 0 Fourier coefficient.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Total mass `∫ u dx` by the uniform quadrature.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise binary combination with another field on the same grid.
    pub fn zip_with(
        &self,
        other: &RealField,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(HksError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(RealField {
            grid: self.grid,
            values,
        })
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a + scale * b)
    }

    pub fn scale(&self, s: f64) -> RealField {
        self.map(|v| s * v)
    }
}

/// Grid L^p norm by uniform quadrature: `(h^dim Σ |f_i|^p)^(1/p)` for finite
/// p, `max |f_i|` for p = ∞. Spectrally accurate for resolved fields.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(HksError::InvalidExponent(p));
    }
    f.ensure_finite()?;
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let h = f.grid().cell_volume();
    if p == 1.0 {
        return Ok(h * f.values().iter().map(|v| v.abs()).sum::<f64>());
    }
    if p == 2.0 {
        return Ok((h * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt());
    }
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((h * sum).powf(1.0 / p))
}
