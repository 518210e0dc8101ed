//! Periodic grids on the torus with period 2π per axis.

use crate::error::{HksError, Result};
use std::f64::consts::TAU;

/// Uniform periodic grid on `[0, 2π)^dim` with `n` points per axis.
///
/// `n` must be a power of two with `n >= 8`, and `dim` is 1 or 2. Fixing the
/// period to 2π makes every resolved wavenumber an integer, which keeps the
/// dyadic frequency bookkeeping exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(HksError::InvalidGrid(format!(
                "dim must be 1 or 2, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(HksError::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain period per axis (fixed 2π).
    pub fn period(&self) -> f64 {
        TAU
    }

    /// Grid spacing `h = 2π / n`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Cell volume `h^dim` used by the grid quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of the j-th point along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    /// Largest resolved wavenumber magnitude per axis (the Nyquist mode n/2).
    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Signed integer wavenumber for FFT bin `idx` along one axis, in
    /// `[-n/2, n/2]` with the Nyquist bin mapped to `+n/2`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let idx = idx as i64;
        if idx <= n / 2 {
            idx
        } else {
            idx - n
        }
    }

    /// Largest squared Euclidean wavenumber on this grid, `dim * (n/2)^2`.
    pub fn max_k_squared(&self) -> u64 {
        let ny = self.nyquist() as u64;
        self.dim as u64 * ny * ny
    }
}
