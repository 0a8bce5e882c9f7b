//! Exact reference distributions: enumeration over all indicator vectors,
//! the permutation sum, and the binomial closed form.

use crate::error::{GpbError, Result};
use crate::params::ValidatedParams;
use crate::rng::Xoshiro256StarStar;
use crate::table::{CdfTable, PmfTable};

/// Largest `Σ w_k` accepted by [`enum_pmf`].
pub const ENUM_CAP: u64 = 25;

/// Largest `Σ w_k` accepted by [`perm_pmf`].
pub const PERM_CAP: u64 = 8;

/// Gray-code steps between full recomputations of the running product.
const REFRESH_INTERVAL: u64 = 1 << 12;

type Indicator = (f64, i64, i64);

fn expanded_terms(params: &ValidatedParams, cap: u64) -> Result<Vec<Indicator>> {
    let count = params.effective_count();
    if count > cap {
        return Err(GpbError::OracleCap { count, cap });
    }
    Ok(params
        .expanded()
        .terms()
        .map(|(p, a, b, _)| (p, a, b))
        .collect())
}

/// Running product of the per-indicator factors, tracking exact zeros apart
/// so that a factor can be divided back out.
struct Product {
    nonzero: f64,
    zeros: u32,
}

impl Product {
    fn from_factors(factors: impl Iterator<Item = f64>) -> Self {
        let mut prod = Product {
            nonzero: 1.0,
            zeros: 0,
        };
        for f in factors {
            prod.mul(f);
        }
        prod
    }

    fn mul(&mut self, f: f64) {
        if f == 0.0 {
            self.zeros += 1;
        } else {
            self.nonzero *= f;
        }
    }

    fn div(&mut self, f: f64) {
        if f == 0.0 {
            self.zeros -= 1;
        } else {
            self.nonzero /= f;
        }
    }

    fn value(&self) -> f64 {
        if self.zeros > 0 {
            0.0
        } else {
            self.nonzero
        }
    }
}

fn factor(p: f64, on: bool) -> f64 {
    if on {
        p
    } else {
        1.0 - p
    }
}

/// Exact pmf by visiting all `2^n` indicator vectors in Gray-code order.
///
/// Each step flips one indicator, so the probability and the support value
/// are updated in O(1); the product is rebuilt from scratch every 4096 steps
/// to bound drift from repeated division.
pub fn enum_pmf(params: &ValidatedParams) -> Result<PmfTable> {
    let terms = expanded_terms(params, ENUM_CAP)?;
    let grid = params.grid();
    let mut mass = vec![0.0; grid.len()];

    let n = terms.len();
    let mut state = vec![false; n];
    let mut value: i64 = terms.iter().map(|t| t.1).sum();
    let mut prod = Product::from_factors(terms.iter().map(|t| factor(t.0, false)));
    mass[(value - grid.offset) as usize] += prod.value();

    for step in 1..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let (p, a, b) = terms[k];
        let old = state[k];
        state[k] = !old;
        prod.div(factor(p, old));
        prod.mul(factor(p, !old));
        value += if old { a - b } else { b - a };
        if step % REFRESH_INTERVAL == 0 {
            prod = Product::from_factors(
                terms.iter().zip(&state).map(|(t, &on)| factor(t.0, on)),
            );
        }
        mass[(value - grid.offset) as usize] += prod.value();
    }

    Ok(PmfTable {
        offset: grid.offset,
        mass,
    })
}

/// Exact pmf through the permutation sum: over every ordering of the
/// indicators and every split point `R`, the first `R` indicators are off
/// and the rest on; each such term is weighted by `1 / (R! (n−R)!)`, which
/// is the number of orderings producing the same split.
pub fn perm_pmf(params: &ValidatedParams) -> Result<PmfTable> {
    let terms = expanded_terms(params, PERM_CAP)?;
    let grid = params.grid();
    let n = terms.len();
    let mut mass = vec![0.0; grid.len()];

    let mut factorial = vec![1.0f64; n + 1];
    for i in 1..=n {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let mut order: Vec<usize> = (0..n).collect();

    // off_prefix[r] = Π_{l<r} (1 − p), on_suffix[r] = Π_{l≥r} p, and the same
    // for the a / b value sums.
    let mut off_prefix = vec![1.0; n + 1];
    let mut on_suffix = vec![1.0; n + 1];
    let mut a_prefix = vec![0i64; n + 1];
    let mut b_suffix = vec![0i64; n + 1];
    let mut visit = |order: &[usize]| {
        for r in 0..n {
            let (p, a, _) = terms[order[r]];
            off_prefix[r + 1] = off_prefix[r] * (1.0 - p);
            a_prefix[r + 1] = a_prefix[r] + a;
        }
        for r in (0..n).rev() {
            let (p, _, b) = terms[order[r]];
            on_suffix[r] = on_suffix[r + 1] * p;
            b_suffix[r] = b_suffix[r + 1] + b;
        }
        for r in 0..=n {
            let x = a_prefix[r] + b_suffix[r];
            let w = off_prefix[r] * on_suffix[r] / (factorial[r] * factorial[n - r]);
            mass[(x - grid.offset) as usize] += w;
        }
    };

    // Heap's algorithm, iterative form.
    visit(&order);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(counters[i], i);
            }
            visit(&order);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }

    Ok(PmfTable {
        offset: grid.offset,
        mass,
    })
}

/// Stirling-series remainder `ln(n!) − [(n + ½) ln n − n + ½ ln 2π]`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

    if n <= 15 {
        // n! is exact in f64 for n ≤ 18.
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let nf = n as f64;
        if n == 0 {
            return 0.0;
        }
        return fact.ln() - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x/np) + np − x`, evaluated without cancellation when
/// `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `Pr(Bin(n, p) = x)` in the saddle-point form, which keeps full relative
/// precision well into the tails.
fn binom_mass(x: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x == 0 {
        let lc = if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
        return lc.exp();
    }
    let xf = x as f64;
    let lc = stirlerr(n)
        - stirlerr(x)
        - stirlerr(n - x)
        - bd0(xf, nf * p)
        - bd0(nf - xf, nf * q);
    let lf = std::f64::consts::TAU.ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Binomial pmf on `0 ..= n`.
pub fn binom_pmf(n: u64, p: f64) -> PmfTable {
    PmfTable {
        offset: 0,
        mass: (0..=n).map(|x| binom_mass(x, n, p)).collect(),
    }
}

/// Binomial cdf on `0 ..= n`.
///
/// Entries below the mode are running sums from the left; entries at and
/// above it are one minus compensated sums of the upper tail, so that both
/// tails keep their absolute accuracy.
pub fn binom_cdf(n: u64, p: f64) -> CdfTable {
    let mass = binom_pmf(n, p).mass;
    let len = mass.len();
    let mode = (((n + 1) as f64 * p).floor() as usize).min(len - 1);

    let mut cum = vec![0.0; len];
    let mut lower = NeumaierSum::default();
    for j in 0..mode {
        lower.add(mass[j]);
        cum[j] = lower.value();
    }
    let mut upper = NeumaierSum::default();
    cum[len - 1] = 1.0;
    for j in (mode..len - 1).rev() {
        upper.add(mass[j + 1]);
        cum[j] = 1.0 - upper.value();
    }
    CdfTable { offset: 0, cum }
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Draws from the distribution by simulating every indicator. Slow; used only
/// to cross-check table-based sampling.
pub fn simulate_indicators(
    params: &ValidatedParams,
    count: usize,
    rng: &mut Xoshiro256StarStar,
) -> Vec<i64> {
    (0..count)
        .map(|_| {
            params
                .terms()
                .map(|(p, a, b, w)| {
                    (0..w)
                        .map(|_| if rng.next_f64() < p { b } else { a })
                        .sum::<i64>()
                })
                .sum()
        })
        .collect()
}
