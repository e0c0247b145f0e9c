//! Exact finite-`n` second moments of the cubic variations and the
//! Riemann/Weyl sums that drive their limits.
//!
//! `S_n(t) = E[W_a(t) W_b(t)]` is a finite double sum of Gaussian sixth-order
//! moments, so it can be computed without simulation.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::flseries::f_term;
use crate::quad::{fl_cusps, integrate_cusped, DEFAULT_PANELS};
use crate::rho_limit::RhoFunction;
use crate::steps_within;

/// fBm covariance with `H = 1/6`: `½(s^{1/3} + t^{1/3} - |t-s|^{1/3})`.
pub fn fbm_cov(s: f64, t: f64) -> f64 {
    0.5 * (s.cbrt() + t.cbrt() - (t - s).abs().cbrt())
}

/// `E[X³Y³] = 6c³ + 9 v1 v2 c` for centred jointly Gaussian `(X, Y)`.
pub fn gaussian_cubic_moment(c: f64, v1: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) || c.abs() > (v1 * v2).sqrt() * (1.0 + 1e-12) {
        return Err(Error::InvalidCovariance { c, v1, v2 });
    }
    Ok(6.0 * c * c * c + 9.0 * v1 * v2 * c)
}

#[inline]
fn cbrt_abs_int(d: i64) -> f64 {
    (d.unsigned_abs() as f64).cbrt()
}

/// Covariance of `B(i/a) - B((i-1)/a)` and `B(j/b) - B((j-1)/b)`.
///
/// The `s^{1/3}` and `t^{1/3}` parts of [`fbm_cov`] cancel in the double
/// difference; the remaining `|i/a - j/b|` gaps are formed as integers over
/// `ab` so no precision is lost to cancellation.
pub fn increment_cov(i: u64, a: u64, j: u64, b: u64) -> f64 {
    let d = (i * b) as i64 - (j * a) as i64;
    let (a, b) = (a as i64, b as i64);
    let num = -cbrt_abs_int(d) + cbrt_abs_int(d + a) + cbrt_abs_int(d - b) - cbrt_abs_int(d + a - b);
    0.5 * num / ((a * b) as f64).cbrt()
}

fn cross_moment(a: u64, b: u64, t: f64) -> Result<f64> {
    let na = steps_within(a, t);
    let nb = steps_within(b, t);
    if na == 0 {
        return Err(Error::DegenerateWindow { n: a, t });
    }
    if nb == 0 {
        return Err(Error::DegenerateWindow { n: b, t });
    }
    let va = (a as f64).cbrt().recip();
    let vb = (b as f64).cbrt().recip();
    let cross = 9.0 * va * vb;
    // Rows are summed independently and reduced in row order.
    let rows: Vec<f64> = (1..=na)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in 1..=nb {
                let c = increment_cov(i, a, j, b);
                row += 6.0 * c * c * c + cross * c;
            }
            row
        })
        .collect();
    Ok(rows.iter().sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub a: u64,
    pub b: u64,
    pub t: f64,
    /// `E[W_a(t) W_b(t)]`.
    pub s: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub corr: f64,
    /// `∫_0^t ρ` for the supplied regime, if any.
    pub predicted: Option<f64>,
    pub gap: Option<f64>,
}

/// `S = E[W_a(t) W_b(t)]` with both variances, by direct double summation.
pub fn s_n_exact(a: u64, b: u64, t: f64, rho: Option<&RhoFunction>) -> Result<CovarianceReport> {
    if a == 0 || b == 0 || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("need a, b >= 1 and t > 0 (got {a}, {b}, {t})")));
    }
    let s = cross_moment(a, b, t)?;
    let var_a = cross_moment(a, a, t)?;
    let var_b = if a == b { var_a } else { cross_moment(b, b, t)? };
    let corr = s / (var_a * var_b).sqrt();
    let predicted = match rho {
        Some(r) => Some(r.integral(t, 1e-9)?),
        None => None,
    };
    Ok(CovarianceReport {
        a,
        b,
        t,
        s,
        var_a,
        var_b,
        corr,
        predicted,
        gap: predicted.map(|p| (s - p).abs()),
    })
}

/// `{j p/q}` as the reduced residue `(j p mod q) / q`.
fn frac_of_multiple(j: u64, l: &Ratio<u64>) -> f64 {
    let (p, q) = (*l.numer() as u128, *l.denom() as u128);
    ((j as u128 * p) % q) as f64 / q as f64
}

/// `β̃(m, n) = (1/a_n) Σ_{j=1}^{⌊a_n t⌋} f_{m,L}({j L_n})`.
pub fn beta_tilde(m: i64, a_n: u64, l_n: Ratio<u64>, t: f64, l: f64) -> Result<f64> {
    if a_n == 0 || *l_n.numer() == 0 {
        return Err(Error::InvalidArgument("a_n and L_n must be positive".into()));
    }
    let steps = steps_within(a_n, t);
    let sum: f64 = (1..=steps).map(|j| f_term(m, l, frac_of_multiple(j, &l_n))).sum();
    Ok(sum / a_n as f64)
}

/// `∫_0^1 f_{m,L}(x) dx`.
pub fn term_integral(m: i64, l: f64, tol: f64) -> Result<f64> {
    integrate_cusped(|x| f_term(m, l, x), 0.0, 1.0, &fl_cusps(l, 0.0, 1.0), tol, DEFAULT_PANELS)
}

/// `σ_{k,n} = Σ_{j=1}^{⌊a_n t⌋} e^{2πi k j L_n}` in closed form.
///
/// Phases are reduced exactly as `(k p mod q)/q`; when `q | k` the sum is
/// exactly `⌊a_n t⌋`.
pub fn weyl_sum(k: i64, a_n: u64, l_n: Ratio<u64>, t: f64) -> Complex64 {
    let steps = steps_within(a_n, t);
    let (p, q) = (*l_n.numer() as i128, *l_n.denom() as i128);
    let residue = (k as i128 * p).mod_floor(&q);
    if residue == 0 {
        return Complex64::new(steps as f64, 0.0);
    }
    let alpha = Complex64::from_polar(1.0, TAU * residue as f64 / q as f64);
    let top = (residue * steps as i128).mod_floor(&q);
    let alpha_m = Complex64::from_polar(1.0, TAU * top as f64 / q as f64);
    alpha * (Complex64::new(1.0, 0.0) - alpha_m) / (Complex64::new(1.0, 0.0) - alpha)
}

/// Fourier picture of `β̃(m, n)`.
#[derive(Clone, Debug, Serialize)]
pub struct WeylDiagnostic {
    pub order: usize,
    /// `c_k = ∫_0^1 f_{m,L}(y) e^{-2πiky} dy` for `k = -order..=order`, as `(re, im)`.
    pub coefficients: Vec<(f64, f64)>,
    /// `σ_{k,n}` for the same `k`, as `(re, im)`.
    pub sums: Vec<(f64, f64)>,
    /// `(1/a_n) Σ_{|k| <= N} c_k σ_{k,n}` for `N = 0..=order`.
    pub partial_sums: Vec<f64>,
    /// The sum evaluated directly.
    pub beta_tilde: f64,
}

pub fn weyl_diagnostic(
    m: i64,
    a_n: u64,
    l_n: Ratio<u64>,
    t: f64,
    l: f64,
    order: usize,
    tol: f64,
) -> Result<WeylDiagnostic> {
    let cusps = fl_cusps(l, 0.0, 1.0);
    let mut coefficients = Vec::with_capacity(2 * order + 1);
    let mut sums = Vec::with_capacity(2 * order + 1);
    for k in -(order as i64)..=order as i64 {
        let w = TAU * k as f64;
        let re = integrate_cusped(|y| f_term(m, l, y) * (w * y).cos(), 0.0, 1.0, &cusps, tol, DEFAULT_PANELS)?;
        let im = integrate_cusped(|y| -f_term(m, l, y) * (w * y).sin(), 0.0, 1.0, &cusps, tol, DEFAULT_PANELS)?;
        coefficients.push((re, im));
        let s = weyl_sum(k, a_n, l_n, t);
        sums.push((s.re, s.im));
    }
    let mut partial_sums = Vec::with_capacity(order + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=order {
        let idx = |k: i64| (k + order as i64) as usize;
        let ks: Vec<i64> = if n == 0 { vec![0] } else { vec![-(n as i64), n as i64] };
        for k in ks {
            let (cr, ci) = coefficients[idx(k)];
            let (sr, si) = sums[idx(k)];
            acc += Complex64::new(cr, ci) * Complex64::new(sr, si);
        }
        partial_sums.push(acc.re / a_n as f64);
    }
    Ok(WeylDiagnostic {
        order,
        coefficients,
        sums,
        partial_sums,
        beta_tilde: beta_tilde(m, a_n, l_n, t, l)?,
    })
}
