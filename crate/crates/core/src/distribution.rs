//! The distribution object: pmf, cdf, quantiles and random variates.

use std::sync::OnceLock;

use crate::charfun::cf_all;
use crate::dft::{pmf_from_cf, CleanupDiagnostics};
use crate::error::{GpbError, Result};
use crate::params::{ScalingRecord, ValidatedParams};
use crate::rng::Xoshiro256StarStar;
use crate::table::{CdfTable, PmfTable};

/// Pmf on the support grid via characteristic-function inversion.
pub fn pmf(params: &ValidatedParams) -> Result<PmfTable> {
    pmf_with_diagnostics(params).map(|(pmf, _)| pmf)
}

/// Pmf plus what the cleanup step had to correct.
///
/// A constant `X` (every term has `p ∈ {0, 1}` or `a = b`) yields its exact
/// point mass without a transform.
pub fn pmf_with_diagnostics(params: &ValidatedParams) -> Result<(PmfTable, CleanupDiagnostics)> {
    if let Some(x) = constant_value(params) {
        let grid = params.grid();
        let mut mass = vec![0.0; grid.len()];
        mass[(x - grid.offset) as usize] = 1.0;
        let diagnostics = CleanupDiagnostics {
            raw_total: 1.0,
            ..Default::default()
        };
        return Ok((PmfTable { offset: grid.offset, mass }, diagnostics));
    }
    pmf_from_cf(&cf_all(params))
}

/// The value of `X` when it is not random.
pub fn constant_value(params: &ValidatedParams) -> Option<i64> {
    params.terms().try_fold(0i64, |acc, (p, a, b, w)| {
        let v = if a == b || p == 0.0 {
            a
        } else if p == 1.0 {
            b
        } else {
            return None;
        };
        Some(acc + w as i64 * v)
    })
}

/// Cumulative sums of a cleaned pmf, kept monotone and pinned to exactly one
/// at the top of the support.
fn pinned_cdf(pmf: &PmfTable) -> CdfTable {
    let mut acc = 0.0f64;
    let mut cum: Vec<f64> = pmf
        .mass
        .iter()
        .map(|&p| {
            acc = (acc + p).min(1.0);
            acc
        })
        .collect();
    if let Some(last) = cum.last_mut() {
        *last = 1.0;
    }
    CdfTable {
        offset: pmf.offset,
        cum,
    }
}

/// A generalized Poisson-binomial distribution.
///
/// The pmf and cdf tables are computed on first use and cached. Query points
/// and returned support values are in the caller's units: when the
/// parameters went through [`reduce_gcd`](crate::reduce_gcd) or
/// [`scale_decimal`](crate::scale_decimal), pass the matching
/// [`ScalingRecord`] to [`GpbDistribution::with_scaling`].
#[derive(Debug)]
pub struct GpbDistribution {
    params: ValidatedParams,
    scaling: ScalingRecord,
    inversion: OnceLock<Result<(PmfTable, CleanupDiagnostics)>>,
    cdf: OnceLock<CdfTable>,
}

impl GpbDistribution {
    pub fn new(params: ValidatedParams) -> Self {
        let scaling = ScalingRecord::identity(params.grid().offset);
        Self::with_scaling(params, scaling)
    }

    pub fn with_scaling(params: ValidatedParams, scaling: ScalingRecord) -> Self {
        Self {
            params,
            scaling,
            inversion: OnceLock::new(),
            cdf: OnceLock::new(),
        }
    }

    pub fn params(&self) -> &ValidatedParams {
        &self.params
    }

    pub fn scaling(&self) -> &ScalingRecord {
        &self.scaling
    }

    fn inversion(&self) -> Result<&(PmfTable, CleanupDiagnostics)> {
        self.inversion
            .get_or_init(|| pmf_with_diagnostics(&self.params))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Pmf on the reduced integer grid.
    pub fn pmf(&self) -> Result<&PmfTable> {
        self.inversion().map(|(pmf, _)| pmf)
    }

    pub fn diagnostics(&self) -> Result<CleanupDiagnostics> {
        self.inversion().map(|(_, d)| *d)
    }

    /// Cdf on the reduced integer grid.
    pub fn cdf(&self) -> Result<&CdfTable> {
        if let Some(cdf) = self.cdf.get() {
            return Ok(cdf);
        }
        let pmf = self.pmf()?;
        Ok(self.cdf.get_or_init(|| pinned_cdf(pmf)))
    }

    /// Support value in caller units for grid index `j`.
    pub fn support_value(&self, j: usize) -> f64 {
        self.scaling.to_original(self.params.grid().value(j))
    }

    pub fn mean(&self) -> f64 {
        self.params.mean() * self.scaling.gcd_divisor as f64 / self.scaling.decimal_factor as f64
    }

    /// `Pr(X = x)`; zero for points off the support.
    pub fn pmf_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let pmf = self.pmf()?;
        Ok(xs
            .iter()
            .map(|&x| {
                let y = self.scaling.to_reduced(x);
                if y.fract() != 0.0 || !y.is_finite() {
                    0.0
                } else {
                    pmf.at(y as i64)
                }
            })
            .collect())
    }

    /// `F(x) = Pr(X ≤ x)` as a right-continuous step function.
    pub fn cdf_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let cdf = self.cdf()?;
        let grid = self.params.grid();
        Ok(xs
            .iter()
            .map(|&x| {
                let y = self.scaling.to_reduced(x);
                if y.is_nan() {
                    return f64::NAN;
                }
                let rel = y.floor() - grid.offset as f64;
                if rel < 0.0 {
                    0.0
                } else if rel >= grid.width as f64 {
                    1.0
                } else {
                    cdf.cum[rel as usize]
                }
            })
            .collect())
    }

    /// Grid index of the smallest support point with `F ≥ q`.
    pub fn quantile_index(&self, q: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&q) {
            return Err(GpbError::QuantileLevel(q));
        }
        let cum = &self.cdf()?.cum;
        Ok(cum.partition_point(|&c| c < q).min(cum.len() - 1))
    }

    /// Smallest support value `x` with `F(x) ≥ q`, for each level.
    pub fn quantile(&self, qs: &[f64]) -> Result<Vec<f64>> {
        qs.iter()
            .map(|&q| self.quantile_index(q).map(|j| self.support_value(j)))
            .collect()
    }

    /// Grid indices drawn by inverting the cdf at uniform variates.
    pub fn sample_indices(&self, count: usize, rng: &mut Xoshiro256StarStar) -> Result<Vec<usize>> {
        let cum = &self.cdf()?.cum;
        let last = cum.len() - 1;
        Ok((0..count)
            .map(|_| {
                let u = rng.next_f64();
                // u < 1 = cum[last], so the search never runs off the table;
                // points with zero mass are never selected.
                cum.partition_point(|&c| c <= u).min(last)
            })
            .collect())
    }

    /// `count` draws using the caller's generator state.
    pub fn sample_with(&self, count: usize, rng: &mut Xoshiro256StarStar) -> Result<Vec<f64>> {
        Ok(self
            .sample_indices(count, rng)?
            .into_iter()
            .map(|j| self.support_value(j))
            .collect())
    }

    /// `count` draws from a generator seeded with `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        self.sample_with(count, &mut Xoshiro256StarStar::seed_from_u64(seed))
    }
}
