//! Orthonormal multi-level discrete wavelet transform with Daubechies
//! filters, periodic boundary extension, and exact inverse.
//!
//! Periodic extension keeps the coefficient count equal to the signal length
//! and makes the transform matrix orthogonal, so the inverse is the adjoint
//! and Parseval holds exactly (up to rounding). Convolution is direct; with
//! signals up to a few thousand samples and at most 20 taps there is nothing
//! to gain from FFT-based filtering, and the direct form is bit-reproducible.

mod daubechies;

pub use daubechies::scaling_filter;

use crate::error::{Error, Result};

/// Supported filter lengths (Daubechies db1..db10).
pub const SUPPORTED_FILTER_LENGTHS: [usize; 10] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20];

/// Boundary extension mode. Only periodic extension is implemented; it is
/// the one mode that keeps the transform square and orthonormal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Transform parameters: Daubechies filter length and decomposition depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletSpec {
    pub filter_length: usize,
    pub levels: usize,
    pub boundary: Boundary,
}

/// Conventional decomposition depth for EEG at ~173 Hz.
pub const DEFAULT_LEVELS: usize = 5;

impl WaveletSpec {
    pub fn new(filter_length: usize, levels: usize) -> Result<Self> {
        if scaling_filter(filter_length).is_none() {
            return Err(Error::Invalid(format!(
                "unsupported filter length {} (supported: even 2..=20)",
                filter_length
            )));
        }
        if levels == 0 {
            return Err(Error::Invalid("levels must be at least 1".into()));
        }
        Ok(WaveletSpec {
            filter_length,
            levels,
            boundary: Boundary::Periodic,
        })
    }

    /// Check that a signal of length `ns` can be decomposed `levels` times.
    pub fn validate_length(&self, ns: usize) -> Result<()> {
        let block = 1usize
            .checked_shl(self.levels as u32)
            .ok_or_else(|| Error::Invalid(format!("levels {} too large", self.levels)))?;
        if ns < 2 || ns % block != 0 {
            return Err(Error::Invalid(format!(
                "signal length {} is not divisible by 2^{} = {}",
                ns, self.levels, block
            )));
        }
        Ok(())
    }
}

/// Multi-level DWT coefficients stored flat as
/// `[approx(J) | detail(J) | detail(J-1) | ... | detail(1)]`, together with
/// a retained/zeroed mask over the same flat index space.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    values: Vec<f64>,
    keep_mask: Vec<bool>,
    levels: usize,
}

impl CoefficientSet {
    pub(crate) fn new(values: Vec<f64>, levels: usize) -> Self {
        let keep_mask = vec![true; values.len()];
        CoefficientSet {
            values,
            keep_mask,
            levels,
        }
    }

    /// Rebuild a coefficient set from flat values and mask (used by the
    /// decoder).
    pub fn from_parts(values: Vec<f64>, keep_mask: Vec<bool>, levels: usize) -> Result<Self> {
        if values.len() != keep_mask.len() {
            return Err(Error::Invalid(format!(
                "coefficient/mask length mismatch: {} vs {}",
                values.len(),
                keep_mask.len()
            )));
        }
        Ok(CoefficientSet {
            values,
            keep_mask,
            levels,
        })
    }

    /// Original signal length (total coefficient count).
    pub fn ns(&self) -> usize {
        self.values.len()
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Flat coefficient values, unmasked.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn keep_mask(&self) -> &[bool] {
        &self.keep_mask
    }

    /// Number of retained coefficients (M).
    pub fn kept_count(&self) -> usize {
        self.keep_mask.iter().filter(|&&k| k).count()
    }

    /// Level-J approximation coefficients.
    pub fn approximation(&self) -> &[f64] {
        &self.values[..self.ns() >> self.levels]
    }

    /// Detail coefficients of the given level (1 = finest .. J = coarsest).
    pub fn detail(&self, level: usize) -> &[f64] {
        assert!(level >= 1 && level <= self.levels, "level out of range");
        let len = self.ns() >> level;
        &self.values[len..2 * len]
    }

    /// Coefficients with masked-out entries zeroed.
    pub fn masked_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.keep_mask)
            .map(|(&v, &keep)| if keep { v } else { 0.0 })
            .collect()
    }

    pub(crate) fn with_mask(&self, keep_mask: Vec<bool>) -> Self {
        assert_eq!(keep_mask.len(), self.values.len());
        CoefficientSet {
            values: self.values.clone(),
            keep_mask,
            levels: self.levels,
        }
    }
}

/// High-pass filter by the quadrature mirror relation
/// `g[m] = (-1)^m h[F-1-m]`.
fn quadrature_mirror(h: &[f64]) -> Vec<f64> {
    h.iter()
        .rev()
        .enumerate()
        .map(|(m, &c)| if m % 2 == 0 { c } else { -c })
        .collect()
}

/// One analysis step: periodic correlation with `h` and `g`, downsampled
/// by two. `x.len()` must be even.
fn analyze_step(x: &[f64], h: &[f64], g: &[f64], approx: &mut [f64], detail: &mut [f64]) {
    let n = x.len();
    let half = n / 2;
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (m, (&hm, &gm)) in h.iter().zip(g).enumerate() {
            let s = x[(2 * k + m) % n];
            a += hm * s;
            d += gm * s;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

/// One synthesis step: the exact adjoint of [`analyze_step`].
fn synthesize_step(approx: &[f64], detail: &[f64], h: &[f64], g: &[f64], out: &mut [f64]) {
    let half = approx.len();
    let n = 2 * half;
    out[..n].fill(0.0);
    for k in 0..half {
        let a = approx[k];
        let d = detail[k];
        for (m, (&hm, &gm)) in h.iter().zip(g).enumerate() {
            out[(2 * k + m) % n] += hm * a + gm * d;
        }
    }
}

/// Forward J-level transform. The returned set has every coefficient
/// retained (full keep mask).
pub fn dwt(samples: &[f64], spec: &WaveletSpec) -> Result<CoefficientSet> {
    spec.validate_length(samples.len())?;
    let h = scaling_filter(spec.filter_length)
        .ok_or_else(|| Error::Invalid(format!("unsupported filter length {}", spec.filter_length)))?;
    let g = quadrature_mirror(h);

    let ns = samples.len();
    let mut out = vec![0.0; ns];
    let mut cur = samples.to_vec();
    for _ in 0..spec.levels {
        let n = cur.len();
        let half = n / 2;
        let mut approx = vec![0.0; half];
        // Detail of this level lands at [half, n) in the flat layout.
        let (_, detail_region) = out.split_at_mut(half);
        analyze_step(&cur, h, &g, &mut approx, &mut detail_region[..half]);
        cur = approx;
    }
    out[..cur.len()].copy_from_slice(&cur);
    Ok(CoefficientSet::new(out, spec.levels))
}

/// Inverse transform of the masked coefficients.
pub fn idwt(coeffs: &CoefficientSet, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if coeffs.levels != spec.levels {
        return Err(Error::Invalid(format!(
            "coefficient set has {} levels, spec has {}",
            coeffs.levels, spec.levels
        )));
    }
    spec.validate_length(coeffs.ns())?;
    let h = scaling_filter(spec.filter_length)
        .ok_or_else(|| Error::Invalid(format!("unsupported filter length {}", spec.filter_length)))?;
    let g = quadrature_mirror(h);

    let masked = coeffs.masked_values();
    let ns = masked.len();
    let mut cur = masked[..ns >> spec.levels].to_vec();
    let mut buf = vec![0.0; ns];
    for level in (1..=spec.levels).rev() {
        let half = ns >> level;
        debug_assert_eq!(cur.len(), half);
        let detail = &masked[half..2 * half];
        synthesize_step(&cur, detail, h, &g, &mut buf);
        cur = buf[..2 * half].to_vec();
    }
    Ok(cur)
}
