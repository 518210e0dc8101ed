//! Discrete Fourier transforms and Fourier-multiplier operators: gradient,
//! Laplacian, Bessel potential (I - Δ)^{-1}, and the 2/3-rule dealiasing
//! filter used by the pseudospectral products.

use crate::error::{HksError, Result};
use crate::fft;
use crate::field::RealField;
use crate::grid::TorusGrid;
pub use num_complex::Complex64;

/// Complex Fourier coefficients of a real field, normalized so that the
/// k = 0 coefficient equals the field mean. Coefficients are stored in FFT
/// bin order per axis (`k = 0, 1, ..., n/2, -n/2+1, ..., -1`).
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(HksError::InvalidGrid(format!(
                "coefficient buffer length {} does not match grid size {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed wavevector `(k0, k1)` (`k1` ignored for dim 1).
    pub fn coeff_at(&self, k0: i64, k1: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let wrap = |k: i64| (((k % n) + n) % n) as usize;
        match self.grid.dim() {
            1 => self.coeffs[wrap(k0)],
            _ => self.coeffs[wrap(k0) * self.grid.n() + wrap(k1)],
        }
    }

    /// Largest deviation from Hermitian symmetry, `max_k |c(-k) - conj(c(k))|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.grid.n();
        let mut max_dev = 0.0_f64;
        match self.grid.dim() {
            1 => {
                for i in 0..n {
                    let j = (n - i) % n;
                    let dev = (self.coeffs[j] - self.coeffs[i].conj()).norm();
                    max_dev = max_dev.max(dev);
                }
            }
            _ => {
                for i in 0..n {
                    let i2 = (n - i) % n;
                    for j in 0..n {
                        let j2 = (n - j) % n;
                        let dev = (self.coeffs[i2 * n + j2] - self.coeffs[i * n + j].conj()).norm();
                        max_dev = max_dev.max(dev);
                    }
                }
            }
        }
        max_dev
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// Σ_k |c_k|^2, the spectral side of the Parseval identity
    /// `||f||²_{L²} = (2π)^dim Σ_k |c_k|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Apply a multiplier `m(k)` given the signed wavevector of each bin.
    pub fn apply_multiplier(&self, mut m: impl FnMut(&[i64]) -> Complex64) -> SpectralField {
        let n = self.grid.n();
        let mut coeffs = self.coeffs.clone();
        match self.grid.dim() {
            1 => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    *c *= m(&[self.grid.wavenumber(i)]);
                }
            }
            _ => {
                for i in 0..n {
                    let k0 = self.grid.wavenumber(i);
                    for j in 0..n {
                        let k1 = self.grid.wavenumber(j);
                        coeffs[i * n + j] *= m(&[k0, k1]);
                    }
                }
            }
        }
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Forward transform, normalized so `coeff(0) = mean(f)`.
pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    f.ensure_finite()?;
    let grid = f.grid();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut buf, grid.dim(), grid.n(), false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Ok(SpectralField { grid, coeffs: buf })
}

/// Tolerance beyond which a spectrum is rejected as non-Hermitian.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-8;

/// Residual imaginary content above this (relative) level after an inverse
/// transform indicates a corrupted spectrum.
pub const IMAG_RESIDUE_TOLERANCE: f64 = 1e-10;

/// Inverse transform back to a real field.
///
/// The spectrum must be Hermitian within [`ASYMMETRY_TOLERANCE`] (relative to
/// its largest coefficient); the imaginary residue of the reconstruction is
/// verified against [`IMAG_RESIDUE_TOLERANCE`] and then discarded.
pub fn inverse_transform(spec: &SpectralField) -> Result<RealField> {
    let scale = spec.max_abs().max(f64::MIN_POSITIVE);
    let dev = spec.hermitian_deviation();
    if dev > ASYMMETRY_TOLERANCE * scale {
        return Err(HksError::Asymmetry { max_deviation: dev });
    }
    let field = inverse_transform_unchecked(spec);
    let max_im = field.1;
    if max_im > IMAG_RESIDUE_TOLERANCE * scale.max(field.0.max_abs()) {
        return Err(HksError::Asymmetry {
            max_deviation: max_im,
        });
    }
    Ok(field.0)
}

/// Inverse transform that skips the symmetry check (used internally where the
/// spectrum was just produced by a real-symmetric operation). Returns the
/// field and the largest imaginary residue encountered.
fn inverse_transform_unchecked(spec: &SpectralField) -> (RealField, f64) {
    let grid = spec.grid;
    let mut buf = spec.coeffs.clone();
    fft::transform(&mut buf, grid.dim(), grid.n(), true);
    let mut max_im = 0.0_f64;
    let values: Vec<f64> = buf
        .iter()
        .map(|c| {
            max_im = max_im.max(c.im.abs());
            c.re
        })
        .collect();
    (
        RealField::new(grid, values).expect("buffer length preserved"),
        max_im,
    )
}

/// Inverse transform for spectra known Hermitian by construction (outputs of
/// real-symmetric multipliers and radial masks). Skips the deviation checks,
/// which would misfire on spectra that are pure roundoff leakage.
pub(crate) fn to_real(spec: &SpectralField) -> RealField {
    inverse_transform_unchecked(spec).0
}

/// Spectral gradient. Component `i` carries the multiplier `i k_i`, with the
/// Nyquist-mode derivative coefficient zeroed (the odd derivative of the
/// unpaired n/2 mode has no well-defined sign on the grid).
pub fn gradient(f: &RealField) -> Result<Vec<RealField>> {
    let spec = forward_transform(f)?;
    Ok(gradient_spec(&spec))
}

pub(crate) fn gradient_spec(spec: &SpectralField) -> Vec<RealField> {
    let ny = spec.grid().nyquist();
    (0..spec.grid().dim())
        .map(|axis| {
            let d = spec.apply_multiplier(|k| {
                let ki = k[axis];
                if ki == ny {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, ki as f64)
                }
            });
            to_real(&d)
        })
        .collect()
}

/// Spectral Laplacian, multiplier `-|k|²`.
pub fn laplacian(f: &RealField) -> Result<RealField> {
    let spec = forward_transform(f)?;
    Ok(to_real(&laplacian_spec(&spec)))
}

pub(crate) fn laplacian_spec(spec: &SpectralField) -> SpectralField {
    spec.apply_multiplier(|k| {
        let ksq: i64 = k.iter().map(|&ki| ki * ki).sum();
        Complex64::new(-(ksq as f64), 0.0)
    })
}

/// Bessel potential `S = (I - Δ)^{-1} u`, multiplier `1 / (1 + |k|²)`.
/// Solves `ΔS = S - u` exactly on the resolved modes and preserves the mean.
pub fn bessel_potential(u: &RealField) -> Result<RealField> {
    let spec = forward_transform(u)?;
    Ok(to_real(&bessel_potential_spec(&spec)))
}

pub(crate) fn bessel_potential_spec(spec: &SpectralField) -> SpectralField {
    spec.apply_multiplier(|k| {
        let ksq: i64 = k.iter().map(|&ki| ki * ki).sum();
        Complex64::new(1.0 / (1.0 + ksq as f64), 0.0)
    })
}

/// Largest per-axis wavenumber kept by the 2/3-rule dealiasing filter.
pub fn dealias_cutoff(grid: TorusGrid) -> i64 {
    (grid.n() / 3) as i64
}

/// 2/3-rule truncation: zero every mode with `|k_i| > n/3` on some axis.
/// Quadratic products of fields band-limited to the kept modes cannot alias
/// back into them.
pub(crate) fn dealias_spec(spec: &SpectralField) -> SpectralField {
    let cut = dealias_cutoff(spec.grid());
    spec.apply_multiplier(|k| {
        if k.iter().any(|ki| ki.abs() > cut) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Apply the 2/3-rule filter to a physical field.
pub fn dealias(f: &RealField) -> Result<RealField> {
    let spec = forward_transform(f)?;
    Ok(to_real(&dealias_spec(&spec)))
}
