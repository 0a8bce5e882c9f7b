//! Arbitrary-length discrete Fourier transform and the inversion of
//! characteristic-function samples into a probability mass function.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::charfun::CfSamples;
use crate::error::{GpbError, Result};
use crate::table::PmfTable;

/// Imaginary residue above this is reported as outside tolerance.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// Imaginary residue above this means the samples were not conjugate
/// symmetric, which is a bug upstream rather than rounding.
pub const IMAG_LIMIT: f64 = 1e-6;

/// `out[j] = Σ_l v[l] · e^{−2πi·lj/N}` for any `N ≥ 1`.
///
/// Composite lengths use mixed-radix passes; large prime factors fall back to
/// Rader or Bluestein, so the cost is `O(N log N)` for every length.
pub fn dft_forward(v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(GpbError::EmptyTransform);
    }
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(buf)
}

/// `out[l] = (1/N) Σ_j v[j] · e^{+2πi·lj/N}`, the inverse of [`dft_forward`].
pub fn dft_inverse(v: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.is_empty() {
        return Err(GpbError::EmptyTransform);
    }
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(buf)
}

/// What the cleanup step had to correct.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CleanupDiagnostics {
    /// Largest `|Im ξ_j|` straight out of the transform.
    pub max_imag_residual: f64,
    /// Total mass of the negative entries that were clamped to zero.
    pub negative_mass: f64,
    /// `Σ ξ_j` after clamping, before renormalization.
    pub raw_total: f64,
    /// Half-width of the symmetry residue at the self-mirrored sample.
    pub mirror_residual: f64,
}

impl CleanupDiagnostics {
    pub fn within_tolerance(&self) -> bool {
        self.max_imag_residual <= IMAG_TOLERANCE
    }
}

/// Recovers `ξ_0 … ξ_m` from the samples: scale by `1/(m+1)`, transform,
/// keep the real parts, clamp negatives to zero and renormalize to unit mass.
pub fn pmf_from_cf(samples: &CfSamples) -> Result<(PmfTable, CleanupDiagnostics)> {
    let scale = 1.0 / samples.values.len() as f64;
    let scaled: Vec<Complex64> = samples.values.iter().map(|x| x * scale).collect();
    let spectrum = dft_forward(&scaled)?;

    let max_imag_residual = spectrum.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    if max_imag_residual > IMAG_LIMIT || max_imag_residual.is_nan() {
        return Err(GpbError::ImaginaryResidual {
            residual: max_imag_residual,
            limit: IMAG_LIMIT,
        });
    }

    let mut negative_mass = 0.0;
    let mut mass: Vec<f64> = spectrum
        .iter()
        .map(|z| {
            if z.re < 0.0 {
                negative_mass -= z.re;
                0.0
            } else {
                z.re
            }
        })
        .collect();
    let raw_total: f64 = mass.iter().sum();
    if raw_total > 0.0 {
        mass.iter_mut().for_each(|p| *p /= raw_total);
    }

    let pmf = PmfTable {
        offset: samples.grid.offset,
        mass,
    };
    let diagnostics = CleanupDiagnostics {
        max_imag_residual,
        negative_mass,
        raw_total,
        mirror_residual: samples.mirror_residual,
    };
    Ok((pmf, diagnostics))
}
