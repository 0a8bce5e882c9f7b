//! Characteristic-function samples at the roots of unity of the support grid.
//!
//! For a grid of `m + 1` points, sample `l` is
//!
//! ```text
//! x_l = e^{−iωla} · Π_k [(1 − p_k) e^{iωl a_k} + p_k e^{iωl b_k}]^{w_k},   ω = 2π / (m + 1)
//! ```
//!
//! Each factor is taken apart into log-modulus and principal argument; the
//! sums of both are exponentiated once at the end, so products of thousands
//! of factors with modulus below one do not underflow term by term.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::params::{SupportGrid, ValidatedParams};

/// Below this many term evaluations, `cf_all` stays on the calling thread.
const PARALLEL_WORK_THRESHOLD: usize = 1 << 15;

/// Principal argument in `(−π, π]`, branch for branch:
///
/// | condition          | value              |
/// |--------------------|--------------------|
/// | `x > 0`            | `arctan(y/x)`      |
/// | `y ≥ 0, x < 0`     | `π + arctan(y/x)`  |
/// | `y < 0, x < 0`     | `−π + arctan(y/x)` |
/// | `y > 0, x = 0`     | `π/2`              |
/// | `y < 0, x = 0`     | `−π/2`             |
/// | `y = 0, x = 0`     | `0`                |
///
/// Unlike `f64::atan2`, a negative zero `y` with negative `x` maps to `π`.
pub fn atan2(y: f64, x: f64) -> f64 {
    if x > 0.0 {
        (y / x).atan()
    } else if x < 0.0 {
        if y >= 0.0 {
            PI + (y / x).atan()
        } else {
            -PI + (y / x).atan()
        }
    } else if y > 0.0 {
        FRAC_PI_2
    } else if y < 0.0 {
        -FRAC_PI_2
    } else {
        0.0
    }
}

/// An angle stored as the exact fraction `numer / denom` of a full turn.
///
/// Angles on the sampling grid are `2π · (l · v) / (m + 1)` for integer `v`.
/// Keeping the turn count as an integer and reducing it modulo the
/// denominator before any trigonometry keeps `cos`/`sin` accurate for
/// arbitrarily large `l · v`, and makes quarter turns exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Turn {
    numer: u64,
    denom: u64,
}

impl Turn {
    /// The angle `2π · numer / denom`.
    ///
    /// # Panics
    /// If `denom` is zero.
    pub fn new(numer: i128, denom: u64) -> Self {
        assert!(denom > 0, "turn denominator must be positive");
        Self {
            numer: numer.rem_euclid(denom as i128) as u64,
            denom,
        }
    }

    pub fn radians(&self) -> f64 {
        TAU * (self.numer as f64 / self.denom as f64)
    }

    /// The angle multiplied by an integer, reduced to one turn.
    pub fn scaled(self, factor: i64) -> Self {
        let numer = match (self.numer as i64).checked_mul(factor) {
            Some(v) => v.rem_euclid(self.denom as i64) as u64,
            None => (self.numer as i128 * factor as i128).rem_euclid(self.denom as i128) as u64,
        };
        Self {
            numer,
            denom: self.denom,
        }
    }

    /// `(cos θ, sin θ)` by octant reduction; exact at multiples of `π/2`.
    pub fn cos_sin(&self) -> (f64, f64) {
        let n = self.denom;
        // numer < denom < 2^52, so 4·numer cannot overflow.
        let scaled = 4 * self.numer;
        let quadrant = scaled / n;
        let rem = scaled % n;
        let (c, s) = if rem == 0 {
            (1.0, 0.0)
        } else if 2 * rem <= n {
            let (s, c) = (FRAC_PI_2 * (rem as f64 / n as f64)).sin_cos();
            (c, s)
        } else {
            let (s, c) = (FRAC_PI_2 * ((n - rem) as f64 / n as f64)).sin_cos();
            (s, c)
        };
        match quadrant {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        }
    }
}

/// One factor `z = (1 − p) e^{iθa} + p e^{iθb}` in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CfTerm {
    /// `|z| = 0`: the whole product vanishes.
    ZeroModulus,
    Polar { log_mod: f64, arg: f64 },
}

/// Log-modulus and principal argument of `(1 − p) e^{iθa} + p e^{iθb}`.
pub fn cf_term(p: f64, a: i64, b: i64, theta: Turn) -> CfTerm {
    let (ca, sa) = theta.scaled(a).cos_sin();
    if a == b {
        return CfTerm::Polar {
            log_mod: 0.0,
            arg: atan2(sa, ca),
        };
    }
    let (cb, sb) = theta.scaled(b).cos_sin();
    let q = 1.0 - p;
    let re = q * ca + p * cb;
    let im = q * sa + p * sb;
    if re == 0.0 && im == 0.0 {
        return CfTerm::ZeroModulus;
    }
    // |z|² = 1 − 4p(1 − p)·sin²(θ(b − a)/2); evaluating it this way keeps
    // full relative precision in log|z| when |z| is close to one.
    let half = Turn::new(theta.numer as i128 * (b as i128 - a as i128), 2 * theta.denom);
    let s = half.cos_sin().1;
    let log_mod = 0.5 * (-4.0 * p * q * s * s).ln_1p();
    CfTerm::Polar {
        log_mod,
        arg: atan2(im, re),
    }
}

/// Characteristic-function samples `x_0 … x_m` of one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct CfSamples {
    pub grid: SupportGrid,
    /// Angle step `2π / (m + 1)`.
    pub omega: f64,
    pub values: Vec<Complex64>,
    /// `|Im x_{(m+1)/2}|` before it was zeroed, for odd `m`; zero otherwise.
    pub mirror_residual: f64,
}

impl CfSamples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parameters arranged for repeated sampling: every term that always takes
/// the same value (`p ∈ {0, 1}` or `a = b`) is folded, together with the
/// `e^{−iωla}` recentring factor, into one integer shift.
struct CfPlan {
    len: u64,
    /// `(Σ_det w·v − a) mod (m + 1)`.
    shift: u64,
    /// `(p, a, b, w)` of the terms that remain random.
    random: Vec<(f64, i64, i64, f64)>,
}

impl CfPlan {
    fn new(params: &ValidatedParams) -> Self {
        let grid = params.grid();
        let len = grid.width + 1;
        let mut shift = -(grid.offset as i128);
        let mut random = Vec::new();
        for (p, a, b, w) in params.terms() {
            if a == b || p == 0.0 {
                shift += w as i128 * a as i128;
            } else if p == 1.0 {
                shift += w as i128 * b as i128;
            } else {
                random.push((p, a, b, w as f64));
            }
        }
        Self {
            len,
            shift: shift.rem_euclid(len as i128) as u64,
            random,
        }
    }

    fn sample(&self, l: u64) -> Complex64 {
        let l = l % self.len;
        if l == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let base = Turn::new(l as i128, self.len);
        let (c0, s0) = base.scaled(self.shift as i64).cos_sin();
        let mut acc = Accumulator::new(atan2(s0, c0));
        for &(p, a, b, w) in &self.random {
            match cf_term(p, a, b, base) {
                CfTerm::ZeroModulus => return Complex64::new(0.0, 0.0),
                CfTerm::Polar { log_mod, arg } => acc.push(w * log_mod, w * arg),
            }
        }
        let (log_sum, arg_sum) = acc.finish();
        let modulus = log_sum.exp();
        Complex64::new(modulus * arg_sum.cos(), modulus * arg_sum.sin())
    }
}

/// Sample `x_l`, evaluated directly. `l` is taken modulo `m + 1`; `l ≡ 0`
/// yields exactly `1`.
pub fn cf_sample(params: &ValidatedParams, l: u64) -> Complex64 {
    CfPlan::new(params).sample(l)
}

#[cfg(not(feature = "pairwise-sum"))]
struct Accumulator {
    log_sum: f64,
    arg_sum: f64,
}

#[cfg(not(feature = "pairwise-sum"))]
impl Accumulator {
    fn new(shift_arg: f64) -> Self {
        Self {
            log_sum: 0.0,
            arg_sum: shift_arg,
        }
    }

    #[inline]
    fn push(&mut self, log_mod: f64, arg: f64) {
        self.log_sum += log_mod;
        self.arg_sum += arg;
    }

    fn finish(self) -> (f64, f64) {
        (self.log_sum, self.arg_sum)
    }
}

#[cfg(feature = "pairwise-sum")]
struct Accumulator {
    logs: Vec<f64>,
    args: Vec<f64>,
}

#[cfg(feature = "pairwise-sum")]
impl Accumulator {
    fn new(shift_arg: f64) -> Self {
        Self {
            logs: vec![0.0],
            args: vec![shift_arg],
        }
    }

    #[inline]
    fn push(&mut self, log_mod: f64, arg: f64) {
        self.logs.push(log_mod);
        self.args.push(arg);
    }

    fn finish(self) -> (f64, f64) {
        (pairwise_sum(&self.logs), pairwise_sum(&self.args))
    }
}

#[cfg(feature = "pairwise-sum")]
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// All `m + 1` samples: `x_0 = 1`, indices `1 ..= ⌈m/2⌉` evaluated directly,
/// the rest filled from `x_{m+1−l} = conj(x_l)`.
///
/// For odd `m` the self-mirrored sample `l = (m+1)/2` sits at angle `π` and
/// is real; its imaginary rounding residue is recorded and then dropped.
pub fn cf_all(params: &ValidatedParams) -> CfSamples {
    let grid = params.grid();
    let m = grid.width as usize;
    let omega = TAU / (m as f64 + 1.0);
    let mut values = vec![Complex64::new(0.0, 0.0); m + 1];
    values[0] = Complex64::new(1.0, 0.0);

    let plan = CfPlan::new(params);
    let direct = m.div_ceil(2);
    if direct > 0 {
        let work = direct.saturating_mul(plan.random.len().max(1));
        let slots = &mut values[1..=direct];
        if work >= PARALLEL_WORK_THRESHOLD {
            slots
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, slot)| *slot = plan.sample(i as u64 + 1));
        } else {
            for (i, slot) in slots.iter_mut().enumerate() {
                *slot = plan.sample(i as u64 + 1);
            }
        }
    }
    for l in direct + 1..=m {
        values[l] = values[m + 1 - l].conj();
    }

    let mut mirror_residual = 0.0;
    if m % 2 == 1 {
        let mid = m.div_ceil(2);
        mirror_residual = values[mid].im.abs();
        debug_assert!(
            mirror_residual <= 1e-8,
            "self-mirrored sample has imaginary part {mirror_residual:e}"
        );
        values[mid].im = 0.0;
    }

    CfSamples {
        grid,
        omega,
        values,
        mirror_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GpbParams;

    fn worked_example() -> ValidatedParams {
        GpbParams::new(vec![0.1, 0.2, 0.3], vec![1, 2, 3], vec![2, 3, 4])
            .validate()
            .unwrap()
    }

    /// Direct complex product with floating angles, no log space and no
    /// integer turn reduction.
    fn naive_sample(params: &ValidatedParams, l: u64) -> Complex64 {
        let grid = params.grid();
        let omega = TAU / (grid.width as f64 + 1.0);
        let t = omega * l as f64;
        let mut x = Complex64::from_polar(1.0, -t * grid.offset as f64);
        for (p, a, b, w) in params.terms() {
            let z = Complex64::from_polar(1.0 - p, t * a as f64)
                + Complex64::from_polar(p, t * b as f64);
            for _ in 0..w {
                x *= z;
            }
        }
        x
    }

    #[test]
    fn atan2_branches() {
        assert_eq!(atan2(1.0, 0.0), FRAC_PI_2);
        assert_eq!(atan2(-1.0, 0.0), -FRAC_PI_2);
        assert_eq!(atan2(0.0, 0.0), 0.0);
        assert!((atan2(1.0, 1.0) - PI / 4.0).abs() < 1e-16);
        assert_eq!(atan2(0.0, -1.0), PI);
        assert_eq!(atan2(-0.0, -1.0), PI);
        assert!((atan2(-1.0, -1.0) + 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((atan2(1.0, -1.0) - 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn atan2_agrees_with_std_off_the_cut() {
        for i in 0..360 {
            let t = (i as f64 + 0.5).to_radians() - PI;
            let (y, x) = (3.0 * t.sin(), 3.0 * t.cos());
            assert!((atan2(y, x) - y.atan2(x)).abs() < 1e-15, "angle {t}");
        }
    }

    #[test]
    fn turn_is_exact_at_quarter_turns() {
        assert_eq!(Turn::new(0, 4).cos_sin(), (1.0, 0.0));
        assert_eq!(Turn::new(1, 4).cos_sin(), (0.0, 1.0));
        assert_eq!(Turn::new(2, 4).cos_sin(), (-1.0, 0.0));
        assert_eq!(Turn::new(-1, 4).cos_sin(), (0.0, -1.0));
        assert_eq!(Turn::new(7, 2).cos_sin(), (-1.0, 0.0));
    }

    #[test]
    fn turn_matches_float_trig() {
        for n in [3u64, 7, 12, 97, 1000] {
            for k in 0..n {
                let (c, s) = Turn::new(k as i128, n).cos_sin();
                let t = TAU * k as f64 / n as f64;
                assert!((c - t.cos()).abs() < 1e-15, "{k}/{n}");
                assert!((s - t.sin()).abs() < 1e-15, "{k}/{n}");
            }
        }
        let big = Turn::new(1, 1_000_003).scaled(i64::MAX);
        let expect = Turn::new(i64::MAX as i128 % 1_000_003, 1_000_003);
        assert_eq!(big, expect);
    }

    #[test]
    fn zero_modulus_term() {
        assert_eq!(cf_term(0.5, 0, 1, Turn::new(1, 2)), CfTerm::ZeroModulus);
    }

    #[test]
    fn degenerate_term_is_a_rotation() {
        for (p, c, k) in [(0.3, 5, 1), (0.9, -2, 3), (0.0, 7, 5)] {
            let theta = Turn::new(k, 11);
            let CfTerm::Polar { log_mod, arg } = cf_term(p, c, c, theta) else {
                panic!("unexpected zero modulus");
            };
            assert_eq!(log_mod, 0.0);
            let (cs, sn) = theta.scaled(c).cos_sin();
            assert_eq!(arg, atan2(sn, cs));
        }
    }

    #[test]
    fn term_matches_direct_complex_arithmetic() {
        let theta = Turn::new(1, 6); // π/3
        let t = PI / 3.0;
        let z = Complex64::new(0.7 * t.cos() + 0.3 * (2.0 * t).cos(), 0.7 * t.sin() + 0.3 * (2.0 * t).sin());
        let CfTerm::Polar { log_mod, arg } = cf_term(0.3, 1, 2, theta) else {
            panic!("unexpected zero modulus");
        };
        assert!((log_mod - z.norm().ln()).abs() < 1e-14);
        assert!((arg - z.arg()).abs() < 1e-14);
    }

    #[test]
    fn sample_zero_is_one() {
        assert_eq!(cf_sample(&worked_example(), 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bernoulli_half_sample_vanishes() {
        let v = GpbParams::new(vec![0.5], vec![0], vec![1]).validate().unwrap();
        assert_eq!(cf_sample(&v, 1), Complex64::new(0.0, 0.0));
        let s = cf_all(&v);
        assert_eq!(s.values, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    }

    #[test]
    fn worked_example_matches_naive_product() {
        let v = worked_example();
        let s = cf_all(&v);
        assert_eq!(s.len(), 4);
        for l in 0..4u64 {
            let d = s.values[l as usize] - naive_sample(&v, l);
            assert!(d.norm() < 1e-12, "l = {l}: {d}");
        }
    }

    #[test]
    fn deterministic_distribution_has_single_sample() {
        let v = GpbParams::new(vec![0.3, 0.8], vec![2, -1], vec![2, -1])
            .validate()
            .unwrap();
        let s = cf_all(&v);
        assert_eq!(s.values, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn direct_ranges_tile_both_parities() {
        for m in 1..12u64 {
            let v = GpbParams::new(vec![0.37], vec![0], vec![m as i64]).validate().unwrap();
            let s = cf_all(&v);
            for l in 1..=m {
                let d = s.values[l as usize] - cf_sample(&v, l);
                assert!(d.norm() < 1e-14, "m = {m}, l = {l}");
            }
        }
    }

    #[test]
    fn weighted_matches_expanded() {
        let v = GpbParams::new(vec![0.15, 0.6, 0.42], vec![0, -3, 2], vec![4, 1, 3])
            .with_weights(vec![5, 3, 4])
            .validate()
            .unwrap();
        let e = v.expanded();
        let (sw, se) = (cf_all(&v), cf_all(&e));
        for (a, b) in sw.values.iter().zip(&se.values) {
            assert!((a - b).norm() < 1e-12);
        }
        for l in 0..v.grid().len() as u64 {
            assert!((sw.values[l as usize] - naive_sample(&v, l)).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_width_records_mirror_residual() {
        let v = GpbParams::new(vec![0.2, 0.7], vec![0, 0], vec![1, 2]).validate().unwrap();
        let s = cf_all(&v);
        assert!(s.mirror_residual <= 1e-12);
        assert_eq!(s.values[2].im, 0.0);
    }
}
