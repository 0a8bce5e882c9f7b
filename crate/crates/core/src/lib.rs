//! Exact distribution of the generalized Poisson-binomial (GPB) random
//! variable
//!
//! ```text
//! X = Σ_k w_k · [a_k (1 − I_k) + b_k I_k],   I_k ~ Bernoulli(p_k) independent
//! ```
//!
//! The probability mass function is recovered on the integer support
//! `{a, a+1, …, b}` by sampling the characteristic function at the `m + 1`
//! roots of unity and applying one discrete Fourier transform. Sampling is
//! done in log-modulus / argument form so long products never underflow
//! before the final exponentiation, and only half of the samples are
//! evaluated; the other half follow from conjugate symmetry.
//!
//! ```
//! use gpb::{GpbDistribution, GpbParams};
//!
//! let params = GpbParams::new(vec![0.1, 0.2, 0.3], vec![1, 2, 3], vec![2, 3, 4])
//!     .validate()
//!     .unwrap();
//! let dist = GpbDistribution::new(params);
//! let cdf = dist.cdf_at(&[6.0, 7.0, 8.0, 9.0]).unwrap();
//! assert!((cdf[0] - 0.504).abs() < 1e-12);
//! assert!((cdf[1] - 0.902).abs() < 1e-12);
//! ```

pub mod charfun;
pub mod dft;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod oracles;
pub mod params;
pub mod rng;
pub mod table;

pub use charfun::{atan2, cf_all, cf_sample, cf_term, CfSamples, CfTerm, Turn};
pub use dft::{dft_forward, dft_inverse, pmf_from_cf, CleanupDiagnostics};
pub use distribution::{constant_value, pmf, pmf_with_diagnostics, GpbDistribution};
pub use error::{GpbError, Result};
pub use params::{
    reduce_gcd, scale_decimal, GpbParams, ParamsFile, ScalingRecord, SupportGrid, ValidatedParams,
};
pub use rng::Xoshiro256StarStar;
pub use table::{CdfTable, PmfTable};
