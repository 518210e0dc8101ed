//! Littlewood-Paley dyadic decomposition and Besov norms on the torus.
//!
//! Blocks use sharp spectral cutoffs over Euclidean annuli. On the integer
//! frequency lattice this yields an exactly orthogonal partition (block
//! masks are disjoint), reproducible single-mode norms, and exact
//! reconstruction, at the cost of an equivalence constant against
//! smooth-cutoff norms.

use crate::error::{HksError, Result};
use crate::field::{lp_norm, RealField};
use crate::spectral::{forward_transform, to_real, SpectralField};
use num_complex::Complex64;

/// Besov index triple (regularity `s`, integrability `p`, summability `r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(HksError::InvalidIndex(format!("s must be finite, got {s}")));
        }
        if p.is_nan() || p < 1.0 {
            return Err(HksError::InvalidIndex(format!("p must be >= 1, got {p}")));
        }
        if r.is_nan() || r < 1.0 {
            return Err(HksError::InvalidIndex(format!("r must be >= 1, got {r}")));
        }
        Ok(Self { s, p, r })
    }

    /// Critical-space index `(1 + d/2, 2, 1)` for dimension `d`.
    pub fn critical(dim: usize) -> Self {
        Self {
            s: 1.0 + dim as f64 / 2.0,
            p: 2.0,
            r: 1.0,
        }
    }

    /// Same index with regularity lowered by one.
    pub fn lower(&self) -> Self {
        Self {
            s: self.s - 1.0,
            ..*self
        }
    }
}

/// Nonhomogeneous block index of a squared frequency magnitude: block -1
/// holds `|k| <= 1`, block `q >= 0` holds `2^q <= |k| < 2^{q+1}`. Exact
/// integer arithmetic, no floating logs.
pub fn block_index(k_squared: u64) -> i32 {
    if k_squared <= 1 {
        -1
    } else {
        // largest q with 4^q <= k²
        (63 - k_squared.leading_zeros() as i32) / 2
    }
}

/// Homogeneous block index: the mean (k = 0) is assigned to the lowest block
/// j = 0 together with `1 <= |k| < 2`; blocks j >= 1 are the same annuli as
/// the nonhomogeneous ones. Keeping the mean preserves the embedding of the
/// block-sum norm above the sup norm for fields with nonzero mean.
pub fn homogeneous_block_index(k_squared: u64) -> i32 {
    if k_squared == 0 {
        0
    } else {
        block_index(k_squared).max(0)
    }
}

fn k_squared_at(spec: &SpectralField, flat: usize) -> u64 {
    let grid = spec.grid();
    let n = grid.n();
    match grid.dim() {
        1 => {
            let k = grid.wavenumber(flat);
            (k * k) as u64
        }
        _ => {
            let k0 = grid.wavenumber(flat / n);
            let k1 = grid.wavenumber(flat % n);
            (k0 * k0 + k1 * k1) as u64
        }
    }
}

/// Index of the highest nonempty dyadic annulus on the grid.
pub fn max_block(grid: crate::grid::TorusGrid) -> i32 {
    block_index(grid.max_k_squared())
}

/// Extract one dyadic block in spectral space. Pure masking: composing two
/// extractions with different `q` yields an exactly zero spectrum.
pub fn dyadic_block_spectral(spec: &SpectralField, q: i32) -> SpectralField {
    let mut out = spec.clone();
    for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
        if block_index(k_squared_at(spec, flat)) != q {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

fn homogeneous_block_spectral(spec: &SpectralField, j: i32) -> SpectralField {
    let mut out = spec.clone();
    for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
        if homogeneous_block_index(k_squared_at(spec, flat)) != j {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// The dyadic blocks of a field, indexed `q = -1 ..= max_block(grid)`.
/// Every representable annulus appears, including empty ones, so the block
/// count is always `2 + floor(log2(k_max))`.
#[derive(Debug, Clone)]
pub struct LpBlocks {
    blocks: Vec<(i32, RealField)>,
}

impl LpBlocks {
    pub fn blocks(&self) -> &[(i32, RealField)] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn get(&self, q: i32) -> Option<&RealField> {
        self.blocks.iter().find(|(bq, _)| *bq == q).map(|(_, f)| f)
    }

    /// Sum of all blocks; reconstructs the original field.
    pub fn reconstruct(&self) -> Result<RealField> {
        let mut acc = RealField::zeros(self.blocks[0].1.grid());
        for (_, b) in &self.blocks {
            acc = acc.axpy(1.0, b)?;
        }
        Ok(acc)
    }
}

/// Decompose a field into its sharp dyadic blocks.
pub fn dyadic_blocks(u: &RealField) -> Result<LpBlocks> {
    let spec = forward_transform(u)?;
    let qmax = max_block(u.grid());
    let mut blocks = Vec::with_capacity((qmax + 2) as usize);
    for q in -1..=qmax {
        let block_spec = dyadic_block_spectral(&spec, q);
        blocks.push((q, to_real(&block_spec)));
    }
    Ok(LpBlocks { blocks })
}

/// Low-frequency cutoff `S_q u = Σ_{p <= q-1} Δ_p u`, i.e. the sharp
/// projection onto blocks below `q`.
pub fn low_freq_cutoff(u: &RealField, q: i32) -> Result<RealField> {
    if q < 0 {
        return Err(HksError::Domain(format!(
            "cutoff index must be >= 0, got {q}"
        )));
    }
    let spec = forward_transform(u)?;
    Ok(to_real(&low_freq_cutoff_spectral(&spec, q)))
}

pub(crate) fn low_freq_cutoff_spectral(spec: &SpectralField, q: i32) -> SpectralField {
    let mut out = spec.clone();
    for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
        if block_index(k_squared_at(spec, flat)) > q - 1 {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// ℓ^r aggregation of a sequence of nonnegative terms.
pub fn lr_norm(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().fold(0.0_f64, |m, &t| m.max(t))
    } else if r == 1.0 {
        terms.iter().sum()
    } else if r == 2.0 {
        terms.iter().map(|t| t * t).sum::<f64>().sqrt()
    } else {
        terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Nonhomogeneous Besov norm `|| (2^{qs} ||Δ_q u||_{L^p})_q ||_{ℓ^r}`.
pub fn besov_norm(u: &RealField, idx: BesovIndex) -> Result<f64> {
    let idx = BesovIndex::new(idx.s, idx.p, idx.r)?;
    let spec = forward_transform(u)?;
    let qmax = max_block(u.grid());
    let mut terms = Vec::with_capacity((qmax + 2) as usize);
    for q in -1..=qmax {
        let block = to_real(&dyadic_block_spectral(&spec, q));
        let weight = 2.0_f64.powf(idx.s * q as f64);
        terms.push(weight * lp_norm(&block, idx.p)?);
    }
    Ok(lr_norm(&terms, idx.r))
}

/// Homogeneous block-sum norm over L^∞ blocks: `|| (||Δ̇_j u||_{L^∞})_j ||_{ℓ^r}`
/// with the mean assigned to the lowest block.
pub fn homogeneous_b0_norm(u: &RealField, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(HksError::InvalidIndex(format!("r must be >= 1, got {r}")));
    }
    let spec = forward_transform(u)?;
    let jmax = max_block(u.grid()).max(0);
    let mut terms = Vec::with_capacity((jmax + 1) as usize);
    for j in 0..=jmax {
        let block = to_real(&homogeneous_block_spectral(&spec, j));
        terms.push(block.max_abs());
    }
    Ok(lr_norm(&terms, r))
}

/// Outcome of one interpolation-inequality sample.
#[derive(Debug, Clone, Copy)]
pub struct InterpolationReport {
    /// `||u||` at the interpolated regularity `θ s1 + (1-θ) s2`.
    pub lhs: f64,
    /// `||u||^θ at s1 times ||u||^{1-θ} at s2`.
    pub rhs: f64,
    /// `lhs / rhs`; at most 1 for sharp-cutoff blocks.
    pub ratio: f64,
}

/// Evaluate the interpolation ratio
/// `||u||_{B^{θs1+(1-θ)s2}} / (||u||^θ_{B^{s1}} ||u||^{1-θ}_{B^{s2}})`
/// for a shared `(p, r)` family. Returns `None` for a zero field.
pub fn interpolation_check(
    u: &RealField,
    s1: f64,
    s2: f64,
    theta: f64,
    p: f64,
    r: f64,
) -> Result<Option<InterpolationReport>> {
    if !(s1 < s2) {
        return Err(HksError::Domain(format!("need s1 < s2, got {s1}, {s2}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(HksError::Domain(format!(
            "theta must be in (0,1), got {theta}"
        )));
    }
    let n1 = besov_norm(u, BesovIndex::new(s1, p, r)?)?;
    let n2 = besov_norm(u, BesovIndex::new(s2, p, r)?)?;
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(None);
    }
    let s_mid = theta * s1 + (1.0 - theta) * s2;
    let lhs = besov_norm(u, BesovIndex::new(s_mid, p, r)?)?;
    let rhs = n1.powf(theta) * n2.powf(1.0 - theta);
    Ok(Some(InterpolationReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
    }))
}
