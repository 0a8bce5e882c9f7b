//! Accuracy and timing studies: cdf error against the enumeration and
//! binomial references, and wall-clock cost over an `(n, m)` grid.

use std::io;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::GpbDistribution;
use crate::error::{GpbError, Result};
use crate::oracles::{binom_cdf, enum_pmf, ENUM_CAP};
use crate::params::{GpbParams, SupportGrid, ValidatedParams};
use crate::rng::{splitmix64, Xoshiro256StarStar};
use crate::table::CdfTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `max_x |F(x) − F_ref(x)|`
    pub mae: f64,
    /// `Σ_x |F(x) − F_ref(x)|` over the whole support.
    pub tae: f64,
}

/// Maximum and total absolute difference between two cdfs on one support.
pub fn mae_tae(f: &CdfTable, f_ref: &CdfTable) -> Result<ErrorMetrics> {
    if f.offset != f_ref.offset || f.len() != f_ref.len() {
        return Err(GpbError::SupportMismatch {
            left_offset: f.offset,
            left_width: f.len(),
            right_offset: f_ref.offset,
            right_width: f_ref.len(),
        });
    }
    let (mae, tae) = f
        .cum
        .iter()
        .zip(&f_ref.cum)
        .map(|(a, b)| (a - b).abs())
        .fold((0.0f64, 0.0f64), |(m, t), d| (m.max(d), t + d));
    Ok(ErrorMetrics { mae, tae })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    Enumeration,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub n: u64,
    pub grid: SupportGrid,
    pub min_p: f64,
    pub max_p: f64,
    pub mae: f64,
    pub tae: f64,
    pub reference: Reference,
}

/// One line of the accuracy CSV: `n,a,b,min_p,max_p,mae,tae`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub n: u64,
    pub a: i64,
    pub b: i64,
    pub min_p: f64,
    pub max_p: f64,
    pub mae: f64,
    pub tae: f64,
}

impl From<&AccuracyReport> for AccuracyRow {
    fn from(r: &AccuracyReport) -> Self {
        Self {
            n: r.n,
            a: r.grid.offset,
            b: r.grid.upper(),
            min_p: r.min_p,
            max_p: r.max_p,
            mae: r.mae,
            tae: r.tae,
        }
    }
}

/// An enumeration-checked instance: `n` indicators whose lower values sum to
/// `a` and upper values to `b`, with probabilities drawn from
/// `[min_p, max_p]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub n: u64,
    pub a: i64,
    pub b: i64,
    pub min_p: f64,
    pub max_p: f64,
}

impl OracleInstance {
    /// Splits `a` and `b` as evenly as possible over the indicators. The first
    /// two probabilities sit on the range ends so the realized extremes
    /// equal the requested ones; the rest are uniform in between.
    pub fn realize(&self, rng: &mut Xoshiro256StarStar) -> Result<ValidatedParams> {
        if self.n == 0 {
            return Err(GpbError::Empty);
        }
        if self.n > ENUM_CAP {
            return Err(GpbError::OracleCap {
                count: self.n,
                cap: ENUM_CAP,
            });
        }
        if self.a > self.b {
            return Err(GpbError::Config(format!(
                "lower sum {} exceeds upper sum {}",
                self.a, self.b
            )));
        }
        if !(0.0..=1.0).contains(&self.min_p)
            || !(0.0..=1.0).contains(&self.max_p)
            || self.min_p > self.max_p
        {
            return Err(GpbError::Config(format!(
                "probability range [{}, {}] is not inside [0, 1]",
                self.min_p, self.max_p
            )));
        }
        let n = self.n as usize;
        let split = |total: i64| -> Vec<i64> {
            let (q, r) = (total.div_euclid(n as i64), total.rem_euclid(n as i64));
            (0..n as i64).map(|k| q + i64::from(k < r)).collect()
        };
        let probs = (0..n)
            .map(|k| match k {
                0 => self.min_p,
                1 => self.max_p,
                _ => rng.uniform(self.min_p, self.max_p),
            })
            .collect();
        GpbParams::new(probs, split(self.a), split(self.b)).validate()
    }
}

/// Eighteen standard settings for the enumeration comparison.
pub fn reference_settings() -> Vec<OracleInstance> {
    let supports: [(u64, i64, i64); 6] = [
        (10, 10, 20),
        (10, 10, 50),
        (10, 50, 100),
        (20, 20, 40),
        (20, 40, 100),
        (20, 100, 200),
    ];
    let ranges = [(0.01, 0.50), (0.50, 0.99), (0.01, 0.99)];
    supports
        .iter()
        .flat_map(|&(n, a, b)| {
            ranges.iter().map(move |&(min_p, max_p)| OracleInstance {
                n,
                a,
                b,
                min_p,
                max_p,
            })
        })
        .collect()
}

/// Seed for instance `index` of a study seeded with `seed`, independent of
/// how instances are scheduled.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    let mut s = seed ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut s)
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GpbError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Cdf from the inversion pipeline against the enumeration cdf.
pub fn oracle_report(params: &ValidatedParams) -> Result<AccuracyReport> {
    let dist = GpbDistribution::new(params.clone());
    let exact = enum_pmf(params)?.cumulative();
    let metrics = mae_tae(dist.cdf()?, &exact)?;
    let (min_p, max_p) = params
        .probs()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Ok(AccuracyReport {
        n: params.effective_count(),
        grid: params.grid(),
        min_p,
        max_p,
        mae: metrics.mae,
        tae: metrics.tae,
        reference: Reference::Enumeration,
    })
}

/// One report per instance; `jobs > 1` runs instances in parallel without
/// changing any result.
pub fn validate_oracle(
    instances: &[OracleInstance],
    seed: u64,
    jobs: usize,
) -> Result<Vec<AccuracyReport>> {
    let run = |(i, inst): (usize, &OracleInstance)| {
        let mut rng = Xoshiro256StarStar::seed_from_u64(instance_seed(seed, i));
        oracle_report(&inst.realize(&mut rng)?)
    };
    with_jobs(jobs, || {
        if jobs <= 1 {
            instances.iter().enumerate().map(run).collect()
        } else {
            instances.par_iter().enumerate().map(run).collect()
        }
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialCase {
    pub n: u64,
    pub p: f64,
}

fn binomial_grid(ns: &[u64]) -> Vec<BinomialCase> {
    ns.iter()
        .flat_map(|&n| [0.01, 0.5, 0.9].into_iter().map(move |p| BinomialCase { n, p }))
        .collect()
}

/// `{10, 100, 1000, 10000} × {0.01, 0.5, 0.9}`.
pub fn binomial_default_cases() -> Vec<BinomialCase> {
    binomial_grid(&[10, 100, 1000, 10_000])
}

/// The default cases extended with larger `n`, up to 100 000.
pub fn binomial_extended_cases() -> Vec<BinomialCase> {
    binomial_grid(&[
        10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000,
    ])
}

/// Binomial parameters as `n` separate indicators, or one weighted term.
pub fn binomial_params(case: BinomialCase, weighted: bool) -> Result<ValidatedParams> {
    if case.n == 0 {
        return Err(GpbError::Empty);
    }
    if weighted {
        GpbParams::new(vec![case.p], vec![0], vec![1])
            .with_weights(vec![case.n])
            .validate()
    } else {
        let n = case.n as usize;
        GpbParams::new(vec![case.p; n], vec![0; n], vec![1; n]).validate()
    }
}

pub fn binomial_report(case: BinomialCase, weighted: bool) -> Result<AccuracyReport> {
    let params = binomial_params(case, weighted)?;
    let dist = GpbDistribution::new(params);
    let metrics = mae_tae(dist.cdf()?, &binom_cdf(case.n, case.p))?;
    Ok(AccuracyReport {
        n: case.n,
        grid: dist.params().grid(),
        min_p: case.p,
        max_p: case.p,
        mae: metrics.mae,
        tae: metrics.tae,
        reference: Reference::Binomial,
    })
}

pub fn validate_binomial(
    cases: &[BinomialCase],
    weighted: bool,
    jobs: usize,
) -> Result<Vec<AccuracyReport>> {
    let run = |&case: &BinomialCase| binomial_report(case, weighted);
    with_jobs(jobs, || {
        if jobs <= 1 {
            cases.iter().map(run).collect()
        } else {
            cases.par_iter().map(run).collect()
        }
    })?
}

pub fn write_accuracy_csv<W: io::Write>(out: W, reports: &[AccuracyReport]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(AccuracyRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_accuracy_csv<R: io::Read>(input: R) -> anyhow::Result<Vec<AccuracyRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `count` evenly spaced probabilities from `lo` to `hi` inclusive.
pub fn spaced_probs(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// `(n, m)` pairs; `m ≥ n` is required.
    pub grid: Vec<(u64, u64)>,
    pub p_values: Vec<f64>,
    pub repeats: usize,
    /// A grid point whose warm-up run exceeds this is skipped.
    pub budget_secs: f64,
    /// Collapse identical indicators into weighted terms.
    pub weighted: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let mut grid = Vec::new();
        for &n in &[10u64, 100, 1000] {
            for &m in &[10u64, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000] {
                if m >= n && !(n == 1000 && m > 10_000) {
                    grid.push((n, m));
                }
            }
        }
        Self {
            grid,
            p_values: spaced_probs(10, 0.01, 0.99),
            repeats: 5,
            budget_secs: 10.0,
            weighted: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: u64,
    pub m: u64,
    /// Mean over the p values of the median wall-clock time per cdf.
    pub seconds: f64,
    pub repeats: usize,
    pub p_values: Vec<f64>,
    pub skipped: bool,
}

/// One line of the bench CSV: `m,n,seconds,repeats`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: u64,
    pub n: u64,
    pub seconds: f64,
    pub repeats: usize,
}

/// `n` indicators with common probability `p`, `a_k = 0` and upper values
/// spread so that they sum to `m`.
pub fn bench_params(n: u64, m: u64, p: f64, weighted: bool) -> Result<ValidatedParams> {
    if n == 0 {
        return Err(GpbError::Empty);
    }
    if m < n {
        return Err(GpbError::Config(format!(
            "width {m} is smaller than the indicator count {n}"
        )));
    }
    let (q, r) = (m / n, m % n);
    if weighted {
        let mut params = GpbParams::new(vec![p], vec![0], vec![q as i64]).with_weights(vec![n - r]);
        if r > 0 {
            params.probs.push(p);
            params.lower.push(0);
            params.upper.push(q as i64 + 1);
            params.weights.push(r);
        }
        params.validate()
    } else {
        let upper = (0..n).map(|k| (q + u64::from(k < r)) as i64).collect();
        GpbParams::new(vec![p; n as usize], vec![0; n as usize], upper).validate()
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn time_cdf(params: &ValidatedParams) -> Result<Duration> {
    let start = Instant::now();
    let dist = GpbDistribution::new(params.clone());
    dist.cdf()?;
    Ok(start.elapsed())
}

/// Times a single grid point: for each p a warm-up run and then the median of
/// `repeats` timed runs; the record holds the mean of those medians.
pub fn bench_point(n: u64, m: u64, config: &BenchConfig) -> Result<BenchRecord> {
    let repeats = config.repeats.max(1);
    let mut medians = Vec::with_capacity(config.p_values.len());
    for &p in &config.p_values {
        let params = bench_params(n, m, p, config.weighted)?;
        let warm = time_cdf(&params)?;
        if warm.as_secs_f64() > config.budget_secs {
            return Ok(BenchRecord {
                n,
                m,
                seconds: warm.as_secs_f64(),
                repeats: 1,
                p_values: config.p_values.clone(),
                skipped: true,
            });
        }
        let runs = (0..repeats)
            .map(|_| time_cdf(&params).map(|d| d.as_secs_f64()))
            .collect::<Result<Vec<_>>>()?;
        medians.push(median(runs));
    }
    let seconds = if medians.is_empty() {
        0.0
    } else {
        medians.iter().sum::<f64>() / medians.len() as f64
    };
    Ok(BenchRecord {
        n,
        m,
        seconds,
        repeats,
        p_values: config.p_values.clone(),
        skipped: false,
    })
}

/// Runs the grid sequentially.
pub fn bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config
        .grid
        .iter()
        .map(|&(n, m)| bench_point(n, m, config))
        .collect()
}

/// Least-squares slope of `log(seconds)` against `log(m)` for one `n`.
/// `None` with fewer than two usable points.
pub fn loglog_slope(records: &[BenchRecord], n: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.n == n && !r.skipped && r.seconds > 0.0)
        .map(|r| ((r.m as f64).ln(), r.seconds.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Writes completed records; skipped ones are left out.
pub fn write_bench_csv<W: io::Write>(out: W, records: &[BenchRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records.iter().filter(|r| !r.skipped) {
        w.serialize(BenchRow {
            m: r.m,
            n: r.n,
            seconds: r.seconds,
            repeats: r.repeats,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: io::Read>(input: R) -> anyhow::Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
