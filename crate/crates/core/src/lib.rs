//! Limit covariance of the signed cubic variation of fractional Brownian
//! motion with Hurst parameter `H = 1/6`.
//!
//! For two increasing integer sequences `a_n`, `b_n` with `b_n / a_n → L`,
//! the pair `(W_{a_n}, W_{b_n})` of cubic variations
//! `W_n(t) = Σ_{j <= nt} (B(j/n) - B((j-1)/n))³` converges to a Gaussian
//! process whose cross-covariance density `ρ` depends on `L` and on
//! `k = lim a_n |b_n/a_n - L|`. This crate evaluates `ρ` in every regime
//! ([`rho_limit`]), classifies sequence pairs into regimes
//! ([`seq_classify`]), and checks the limits against exact finite-`n`
//! moments ([`exact_cov`]) and simulation ([`mc_sim`]).
//!
//! ```
//! use cubicvar::rho_limit::RhoFunction;
//!
//! // W_n against W_{2n}: a constant correlation of about 0.2.
//! let rho = RhoFunction::rational(2, 1, 0.0, 1e-8)?;
//! let corr = rho.eval(0.0) / rho.kappa2();
//! assert!((corr - 0.2019).abs() < 1e-3);
//! # Ok::<(), cubicvar::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contfrac;
pub mod error;
pub mod exact_cov;
pub mod flseries;
pub mod mc_sim;
pub mod oracles;
pub mod quad;
pub mod rho_limit;
pub mod seq_classify;
pub mod verify;

pub use error::{Error, Result};

/// `⌊n t⌋`, absorbing the rounding of `n · t` when it lands just below an integer.
pub fn steps_within(n: u64, t: f64) -> u64 {
    let x = n as f64 * t;
    if !(x > 0.0) {
        return 0;
    }
    (x * (1.0 + 4.0 * f64::EPSILON)).floor() as u64
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/monte_carlo.md")]
    mod monte_carlo {}
}
