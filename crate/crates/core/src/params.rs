//! Parameters of the distribution and the transforms that shrink its support.
//!
//! A parameter set is the list of triples `(p_k, a_k, b_k)` together with an
//! integer multiplicity `w_k` for each triple. Term `k` contributes `a_k` with
//! probability `1 − p_k` and `b_k` with probability `p_k`, `w_k` times
//! independently.

use serde::{Deserialize, Serialize};

use crate::error::{GpbError, Result};

/// Raw, unchecked parameter lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpbParams {
    pub probs: Vec<f64>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub weights: Vec<u64>,
}

impl GpbParams {
    /// Parameters with every weight set to one.
    pub fn new(probs: Vec<f64>, lower: Vec<i64>, upper: Vec<i64>) -> Self {
        let weights = vec![1; probs.len()];
        Self {
            probs,
            lower,
            upper,
            weights,
        }
    }

    pub fn with_weights(mut self, weights: Vec<u64>) -> Self {
        self.weights = weights;
        self
    }

    /// Checks every invariant and computes the support grid.
    pub fn validate(self) -> Result<ValidatedParams> {
        let n = self.probs.len();
        if n == 0 && self.lower.is_empty() && self.upper.is_empty() && self.weights.is_empty() {
            return Err(GpbError::Empty);
        }
        if self.lower.len() != n || self.upper.len() != n || self.weights.len() != n {
            return Err(GpbError::LengthMismatch {
                probs: n,
                lower: self.lower.len(),
                upper: self.upper.len(),
                weights: self.weights.len(),
            });
        }
        for (index, &p) in self.probs.iter().enumerate() {
            // NaN fails this check too.
            if !(0.0..=1.0).contains(&p) {
                return Err(GpbError::ProbabilityOutOfRange { index, value: p });
            }
        }
        for (index, (&lower, &upper)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lower > upper {
                return Err(GpbError::InvertedPair {
                    index,
                    lower,
                    upper,
                });
            }
        }
        if let Some(index) = self.weights.iter().position(|&w| w == 0) {
            return Err(GpbError::NonPositiveWeight { index });
        }
        let grid = SupportGrid::from_terms(&self.lower, &self.upper, &self.weights)?;
        Ok(ValidatedParams { raw: self, grid })
    }
}

/// The integer lattice `{offset, offset + 1, …, offset + width}` carrying the
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportGrid {
    pub offset: i64,
    pub width: u64,
}

impl SupportGrid {
    fn from_terms(lower: &[i64], upper: &[i64], weights: &[u64]) -> Result<Self> {
        let mut offset: i64 = 0;
        let mut top: i64 = 0;
        let mut width: u64 = 0;
        for ((&a, &b), &w) in lower.iter().zip(upper).zip(weights) {
            let w = i64::try_from(w).map_err(|_| GpbError::Overflow)?;
            let span = b.checked_sub(a).ok_or(GpbError::Overflow)?;
            offset = a
                .checked_mul(w)
                .and_then(|t| offset.checked_add(t))
                .ok_or(GpbError::Overflow)?;
            top = b
                .checked_mul(w)
                .and_then(|t| top.checked_add(t))
                .ok_or(GpbError::Overflow)?;
            width = (span as u64)
                .checked_mul(w as u64)
                .and_then(|t| width.checked_add(t))
                .ok_or(GpbError::Overflow)?;
        }
        // Indexing the grid must stay within usize and the transform length
        // must stay exactly representable in f64.
        if width >= (1 << 52) || usize::try_from(width + 1).is_err() {
            return Err(GpbError::Overflow);
        }
        debug_assert_eq!(top.checked_sub(offset), i64::try_from(width).ok());
        Ok(Self { offset, width })
    }

    /// Number of grid points, `m + 1`.
    pub fn len(&self) -> usize {
        self.width as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn upper(&self) -> i64 {
        self.offset + self.width as i64
    }

    pub fn value(&self, index: usize) -> i64 {
        self.offset + index as i64
    }
}

/// Parameters whose invariants have been checked. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    raw: GpbParams,
    grid: SupportGrid,
}

impl ValidatedParams {
    pub fn probs(&self) -> &[f64] {
        &self.raw.probs
    }

    pub fn lower(&self) -> &[i64] {
        &self.raw.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.raw.upper
    }

    pub fn weights(&self) -> &[u64] {
        &self.raw.weights
    }

    pub fn grid(&self) -> SupportGrid {
        self.grid
    }

    /// Number of distinct weighted terms.
    pub fn len(&self) -> usize {
        self.raw.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.probs.is_empty()
    }

    /// Number of indicators once weights are expanded, `Σ w_k`.
    pub fn effective_count(&self) -> u64 {
        self.raw.weights.iter().sum()
    }

    /// Iterator over `(p_k, a_k, b_k, w_k)`.
    pub fn terms(&self) -> impl Iterator<Item = (f64, i64, i64, u64)> + '_ {
        self.raw
            .probs
            .iter()
            .zip(&self.raw.lower)
            .zip(&self.raw.upper)
            .zip(&self.raw.weights)
            .map(|(((&p, &a), &b), &w)| (p, a, b, w))
    }

    /// Replicates every term `w_k` times with unit weight.
    pub fn expanded(&self) -> ValidatedParams {
        let cap = self.effective_count() as usize;
        let mut probs = Vec::with_capacity(cap);
        let mut lower = Vec::with_capacity(cap);
        let mut upper = Vec::with_capacity(cap);
        for (p, a, b, w) in self.terms() {
            for _ in 0..w {
                probs.push(p);
                lower.push(a);
                upper.push(b);
            }
        }
        ValidatedParams {
            raw: GpbParams::new(probs, lower, upper),
            grid: self.grid,
        }
    }

    /// `E[X] = Σ_k w_k [(1 − p_k) a_k + p_k b_k]`.
    pub fn mean(&self) -> f64 {
        self.terms()
            .map(|(p, a, b, w)| w as f64 * ((1.0 - p) * a as f64 + p * b as f64))
            .sum()
    }

    pub fn into_inner(self) -> GpbParams {
        self.raw
    }
}

/// Maps the integer support a computation ran on back to the caller's units.
///
/// A reduced support value `s` stands for the original value
/// `s · gcd_divisor / decimal_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub gcd_divisor: u64,
    pub decimal_factor: u64,
    /// Original offset expressed in units of `1 / decimal_factor`, so the
    /// original offset is `original_offset / decimal_factor`.
    pub original_offset: i64,
}

impl ScalingRecord {
    pub fn identity(offset: i64) -> Self {
        Self {
            gcd_divisor: 1,
            decimal_factor: 1,
            original_offset: offset,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.gcd_divisor == 1 && self.decimal_factor == 1
    }

    /// Applies `next` after `self`: `self` maps original units to an
    /// intermediate integer grid and `next` maps that grid further.
    pub fn then(self, next: ScalingRecord) -> ScalingRecord {
        ScalingRecord {
            gcd_divisor: next.gcd_divisor * self.gcd_divisor,
            decimal_factor: self.decimal_factor * next.decimal_factor,
            original_offset: self.original_offset,
        }
    }

    pub fn to_original(&self, reduced: i64) -> f64 {
        (reduced as f64 * self.gcd_divisor as f64) / self.decimal_factor as f64
    }

    /// Position of an original-unit query point on the reduced grid.
    ///
    /// Products such as `50.5 * 10` may land a few ulps away from the
    /// intended integer, so values within `1e-9` (relative) of an integer
    /// are snapped to it.
    pub fn to_reduced(&self, original: f64) -> f64 {
        let y = original * self.decimal_factor as f64 / self.gcd_divisor as f64;
        let r = y.round();
        if (y - r).abs() <= 1e-9 * r.abs().max(1.0) {
            r
        } else {
            y
        }
    }
}

/// Divides every `a_k`, `b_k` by their greatest common divisor.
///
/// The cdf of the returned parameters at `x / g` equals the cdf of the input
/// at `x`. When all values are zero the divisor is one.
pub fn reduce_gcd(params: &ValidatedParams) -> (ValidatedParams, ScalingRecord) {
    let g = params
        .lower()
        .iter()
        .chain(params.upper())
        .fold(0u64, |acc, &v| gcd(acc, v.unsigned_abs()));
    let g = g.max(1);
    let record = ScalingRecord {
        gcd_divisor: g,
        decimal_factor: 1,
        original_offset: params.grid().offset,
    };
    if g == 1 {
        return (params.clone(), record);
    }
    let gi = g as i64;
    let raw = GpbParams {
        probs: params.probs().to_vec(),
        lower: params.lower().iter().map(|&a| a / gi).collect(),
        upper: params.upper().iter().map(|&b| b / gi).collect(),
        weights: params.weights().to_vec(),
    };
    let grid = SupportGrid {
        offset: params.grid().offset / gi,
        width: params.grid().width / g,
    };
    (ValidatedParams { raw, grid }, record)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Converts decimal two-point values to integers by multiplying by
/// `10^digits`.
///
/// Query points must be scaled by the same factor, which the returned record
/// does through [`ScalingRecord::to_reduced`].
pub fn scale_decimal(
    probs: &[f64],
    lower: &[f64],
    upper: &[f64],
    digits: u32,
) -> Result<(GpbParams, ScalingRecord)> {
    let factor = 10u64.checked_pow(digits).ok_or(GpbError::Overflow)?;
    let scale = |values: &[f64]| -> Result<Vec<i64>> {
        values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                let y = v * factor as f64;
                let r = y.round();
                if !y.is_finite() || r.abs() >= 9.007_199_254_740_992e15 {
                    return Err(GpbError::Overflow);
                }
                if (y - r).abs() > 1e-9 * r.abs().max(1.0) {
                    return Err(GpbError::NotIntegral {
                        index,
                        value: v,
                        digits,
                    });
                }
                Ok(r as i64)
            })
            .collect()
    };
    let lower = scale(lower)?;
    let upper = scale(upper)?;
    let offset = lower.iter().sum();
    let params = GpbParams::new(probs.to_vec(), lower, upper);
    let record = ScalingRecord {
        gcd_divisor: 1,
        decimal_factor: factor,
        original_offset: offset,
    };
    Ok((params, record))
}

/// On-disk parameter description, keyed like the `pgpb` argument list.
///
/// ```json
/// {"pp": [0.1, 0.2, 0.3], "aval": [1, 2, 3], "bval": [2, 3, 4], "wts": [1, 1, 1]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub pp: Vec<f64>,
    pub aval: Vec<f64>,
    pub bval: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GpbError::Config(e.to_string()))
    }

    /// Validated integer parameters plus the record mapping them back to the
    /// file's units. Without `digits`, every value must already be integral.
    pub fn build(&self) -> Result<(ValidatedParams, ScalingRecord)> {
        let digits = self.digits.unwrap_or(0);
        if self.aval.len() != self.pp.len() || self.bval.len() != self.pp.len() {
            return Err(GpbError::LengthMismatch {
                probs: self.pp.len(),
                lower: self.aval.len(),
                upper: self.bval.len(),
                weights: self.wts.as_ref().map_or(self.pp.len(), Vec::len),
            });
        }
        let (params, record) = scale_decimal(&self.pp, &self.aval, &self.bval, digits)?;
        let params = match &self.wts {
            Some(w) => params.with_weights(w.clone()),
            None => params,
        }
        .validate()?;
        let record = ScalingRecord {
            original_offset: params.grid().offset,
            ..record
        };
        Ok((params, record))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_of_worked_example() {
        let v = GpbParams::new(vec![0.1, 0.2, 0.3], vec![1, 2, 3], vec![2, 3, 4])
            .validate()
            .unwrap();
        assert_eq!(v.grid(), SupportGrid { offset: 6, width: 3 });
        assert_eq!(v.grid().upper(), 9);
    }

    #[test]
    fn single_bernoulli_grid() {
        let v = GpbParams::new(vec![0.5], vec![0], vec![1]).validate().unwrap();
        assert_eq!(v.grid(), SupportGrid { offset: 0, width: 1 });
    }

    #[test]
    fn weighted_grid_matches_expansion() {
        let v = GpbParams::new(vec![0.2, 0.2], vec![0, 0], vec![1, 1])
            .with_weights(vec![3, 2])
            .validate()
            .unwrap();
        assert_eq!(v.grid(), SupportGrid { offset: 0, width: 5 });
        let e = v.expanded();
        assert_eq!(e.len(), 5);
        assert!(e.weights().iter().all(|&w| w == 1));
        let offset: i64 = e.lower().iter().sum();
        let width: i64 = e.upper().iter().sum::<i64>() - offset;
        assert_eq!((offset, width as u64), (0, 5));
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            GpbParams::new(vec![], vec![], vec![]).validate(),
            Err(GpbError::Empty)
        );
        assert!(matches!(
            GpbParams::new(vec![0.1], vec![0, 1], vec![1]).validate(),
            Err(GpbError::LengthMismatch { .. })
        ));
        assert!(matches!(
            GpbParams::new(vec![1.5], vec![0], vec![1]).validate(),
            Err(GpbError::ProbabilityOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            GpbParams::new(vec![f64::NAN], vec![0], vec![1]).validate(),
            Err(GpbError::ProbabilityOutOfRange { .. })
        ));
        assert_eq!(
            GpbParams::new(vec![0.1, 0.2], vec![0, 3], vec![1, 2]).validate(),
            Err(GpbError::InvertedPair {
                index: 1,
                lower: 3,
                upper: 2
            })
        );
        assert_eq!(
            GpbParams::new(vec![0.1], vec![0], vec![1])
                .with_weights(vec![0])
                .validate(),
            Err(GpbError::NonPositiveWeight { index: 0 })
        );
        assert_eq!(
            GpbParams::new(vec![0.1, 0.1], vec![0, 0], vec![i64::MAX, i64::MAX]).validate(),
            Err(GpbError::Overflow)
        );
    }

    #[test]
    fn degenerate_pair_is_a_shift() {
        let v = GpbParams::new(vec![0.4, 0.7], vec![5, 0], vec![5, 2])
            .validate()
            .unwrap();
        assert_eq!(v.grid(), SupportGrid { offset: 5, width: 2 });
    }

    #[test]
    fn gcd_reduction() {
        let v = GpbParams::new(vec![0.1, 0.2, 0.3], vec![10, 20, 30], vec![20, 30, 40])
            .validate()
            .unwrap();
        let (r, rec) = reduce_gcd(&v);
        assert_eq!(r.lower(), &[1, 2, 3]);
        assert_eq!(r.upper(), &[2, 3, 4]);
        assert_eq!(rec.gcd_divisor, 10);
        assert_eq!(r.grid(), SupportGrid { offset: 6, width: 3 });
        assert_eq!(rec.to_original(7), 70.0);

        let v = GpbParams::new(vec![0.1, 0.2, 0.3], vec![1, 2, 3], vec![2, 3, 4])
            .validate()
            .unwrap();
        let (r, rec) = reduce_gcd(&v);
        assert_eq!(r, v);
        assert_eq!(rec.gcd_divisor, 1);

        let v = GpbParams::new(vec![0.5, 0.5], vec![6, 9], vec![12, 15])
            .validate()
            .unwrap();
        let (r, rec) = reduce_gcd(&v);
        assert_eq!(r.lower(), &[2, 3]);
        assert_eq!(r.upper(), &[4, 5]);
        assert_eq!(rec.gcd_divisor, 3);
        assert_eq!(r.grid().width, v.grid().width / 3);
    }

    #[test]
    fn gcd_of_all_zero_is_one() {
        let v = GpbParams::new(vec![0.5], vec![0], vec![0]).validate().unwrap();
        let (r, rec) = reduce_gcd(&v);
        assert_eq!(rec.gcd_divisor, 1);
        assert_eq!(r, v);
    }

    #[test]
    fn gcd_with_negative_values() {
        let v = GpbParams::new(vec![0.5, 0.5], vec![-4, 2], vec![8, 6])
            .validate()
            .unwrap();
        let (r, rec) = reduce_gcd(&v);
        assert_eq!(rec.gcd_divisor, 2);
        assert_eq!(r.lower(), &[-2, 1]);
        assert_eq!(r.grid().offset, -1);
    }

    #[test]
    fn decimal_scaling() {
        let lower: Vec<f64> = (0..10).map(|i| i as f64 + 0.5).collect();
        let upper: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let probs = vec![0.3; 10];
        let (p, rec) = scale_decimal(&probs, &lower, &upper, 1).unwrap();
        assert_eq!(p.lower, (0..10).map(|i| 10 * i + 5).collect::<Vec<_>>());
        assert_eq!(p.upper, (1..=10).map(|i| 10 * i).collect::<Vec<_>>());
        assert_eq!(rec.decimal_factor, 10);
        assert_eq!(rec.to_reduced(50.5), 505.0);

        let (p, rec) = scale_decimal(&[0.5], &[1.0], &[3.0], 0).unwrap();
        assert_eq!((p.lower, p.upper), (vec![1], vec![3]));
        assert!(rec.is_identity());

        let (p, rec) = scale_decimal(&[0.5], &[0.25], &[1.0], 2).unwrap();
        assert_eq!((p.lower, p.upper), (vec![25], vec![100]));
        assert_eq!(rec.decimal_factor, 100);
        assert_eq!(rec.to_reduced(0.25), 25.0);
    }

    #[test]
    fn decimal_scaling_rejects_leftover_fraction() {
        assert!(matches!(
            scale_decimal(&[0.5], &[0.25], &[1.0], 1),
            Err(GpbError::NotIntegral { index: 0, .. })
        ));
        assert!(matches!(
            scale_decimal(&[0.5], &[0.0], &[1.5], 0),
            Err(GpbError::NotIntegral { .. })
        ));
    }

    #[test]
    fn params_file_round_trip() {
        let text = r#"{"pp":[0.1,0.2,0.3],"aval":[1,2,3],"bval":[2,3,4],"wts":[1,1,1]}"#;
        let file = ParamsFile::from_json(text).unwrap();
        let (v, rec) = file.build().unwrap();
        assert_eq!(v.grid(), SupportGrid { offset: 6, width: 3 });
        assert!(rec.is_identity());

        let text = r#"{"pp":[0.5],"aval":[0.5],"bval":[1.25],"digits":2}"#;
        let (v, rec) = ParamsFile::from_json(text).unwrap().build().unwrap();
        assert_eq!(v.lower(), &[50]);
        assert_eq!(v.upper(), &[125]);
        assert_eq!(rec.decimal_factor, 100);

        let text = r#"{"pp":[0.5],"aval":[0.5],"bval":[1]}"#;
        assert!(matches!(
            ParamsFile::from_json(text).unwrap().build(),
            Err(GpbError::NotIntegral { .. })
        ));
        assert!(matches!(
            ParamsFile::from_json(r#"{"pp":[0.5]}"#),
            Err(GpbError::Config(_))
        ));
    }

    #[test]
    fn mean_is_weighted() {
        let v = GpbParams::new(vec![0.25, 1.0], vec![0, 2], vec![4, 3])
            .with_weights(vec![2, 1])
            .validate()
            .unwrap();
        assert!((v.mean() - (2.0 * 1.0 + 3.0)).abs() < 1e-15);
    }
}
