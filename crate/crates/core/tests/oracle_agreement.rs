use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use gpb::harness::{validate_oracle, OracleInstance};
use gpb::oracles::{binom_cdf, simulate_indicators};
use gpb::{GpbDistribution, GpbParams, Xoshiro256StarStar};

/// Binomial cdf in exact rational arithmetic, `p = num / den`.
fn exact_binomial_cdf(n: u64, num: i64, den: i64) -> Vec<f64> {
    let p = BigRational::new(BigInt::from(num), BigInt::from(den));
    let q = BigRational::one() - &p;
    let mut choose = BigInt::one();
    let mut acc = BigRational::zero();
    let mut out = Vec::new();
    for k in 0..=n {
        if k > 0 {
            choose = choose * BigInt::from(n - k + 1) / BigInt::from(k);
        }
        let mut term = BigRational::from_integer(choose.clone());
        for _ in 0..k {
            term *= &p;
        }
        for _ in k..n {
            term *= &q;
        }
        acc += term;
        out.push(acc.to_f64().unwrap());
    }
    out
}

#[test]
fn binomial_matches_exact_rationals() {
    let exact = exact_binomial_cdf(20, 9, 10);
    let oracle = binom_cdf(20, 0.9);
    let d = GpbDistribution::new(GpbParams::new(vec![0.9; 20], vec![0; 20], vec![1; 20]).validate().unwrap());
    let pipeline = &d.cdf().unwrap().cum;
    for k in 0..=20 {
        assert!((oracle.cum[k] - exact[k]).abs() <= 1e-14, "oracle at {k}");
        assert!((pipeline[k] - exact[k]).abs() <= 1e-14, "pipeline at {k}");
    }
}

#[test]
fn random_small_instances_match_enumeration() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(99);
    let instances: Vec<OracleInstance> = (0..100)
        .map(|_| {
            let n = 1 + (rng.next_u64() % 15);
            let a = (rng.next_u64() % 40) as i64 - 20;
            let b = a + (rng.next_u64() % 40) as i64;
            let lo = rng.next_f64();
            let hi = lo + (1.0 - lo) * rng.next_f64();
            OracleInstance { n, a, b, min_p: lo, max_p: hi }
        })
        .collect();
    let reports = validate_oracle(&instances, 5, 4).unwrap();
    assert_eq!(reports.len(), 100);
    for r in &reports {
        assert!(r.mae <= 1e-12, "n = {} mae = {:e}", r.n, r.mae);
    }
}

#[test]
fn table_sampling_agrees_with_indicator_simulation() {
    let params = GpbParams::new(
        vec![0.2, 0.5, 0.7, 0.05],
        vec![0, -1, 2, 0],
        vec![3, 1, 2, 5],
    )
    .with_weights(vec![2, 1, 3, 1])
    .validate()
    .unwrap();
    let d = GpbDistribution::new(params.clone());
    let count = 200_000;
    let table = d.sample(count, 17).unwrap();
    let direct = simulate_indicators(&params, count, &mut Xoshiro256StarStar::seed_from_u64(18));
    let grid = params.grid();
    let pmf = d.pmf().unwrap();
    let mut hist_t = vec![0usize; grid.len()];
    let mut hist_d = vec![0usize; grid.len()];
    for &x in &table {
        hist_t[(x as i64 - grid.offset) as usize] += 1;
    }
    for &x in &direct {
        hist_d[(x - grid.offset) as usize] += 1;
    }
    for j in 0..grid.len() {
        let p = pmf.mass[j];
        // Five standard deviations of a binomial frequency, plus a floor.
        let tol = 5.0 * (p * (1.0 - p) / count as f64).sqrt() + 1e-4;
        let ft = hist_t[j] as f64 / count as f64;
        let fd = hist_d[j] as f64 / count as f64;
        assert!((ft - p).abs() <= tol, "table at {j}: {ft} vs {p}");
        assert!((fd - p).abs() <= tol, "simulation at {j}: {fd} vs {p}");
    }
}
