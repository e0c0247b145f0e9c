//! The kernel `f_{m,L}`, its lattice sum `f_L`, and the variance constant `κ²`.
//!
//! Every term is a cubed mixed second difference of `|·|^{1/3}`, so terms
//! decay like `|m|^{-5}` and a symmetric window `|m| <= M` leaves a tail of
//! order `M^{-4}`. Truncation orders are picked by doubling from 64 until the
//! band `M < |m| <= 2M` is below half the tolerance on a fixed probe grid.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::contfrac;
use crate::error::{Error, Result};

/// First order tried by the doubling schedule.
pub const SCHEDULE_START: usize = 64;
/// Largest order the doubling schedule may reach.
pub const MAX_ORDER: usize = 1 << 20;
/// Equispaced probe points on `[0, 1]`, endpoints included.
pub const PROBE_POINTS: usize = 33;
/// Denominator cap for recognizing decimals as rationals.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[inline]
fn cbrt_abs(u: f64) -> f64 {
    u.abs().cbrt()
}

/// `f_{m,L}(x)`.
///
/// The four bases are `x - (m-1)`, `x - m - L`, `x - m` and `x - (m-1) - L`;
/// [`FlEvaluator`] sums exactly these floating values, so the series is
/// bit-identical to summing `f_term` over the window.
#[inline]
pub fn f_term(m: i64, l: f64, x: f64) -> f64 {
    let prev = x - (m - 1) as f64;
    let cur = x - m as f64;
    let inner = cbrt_abs(prev) + cbrt_abs(cur - l) - cbrt_abs(cur) - cbrt_abs(prev - l);
    inner * inner * inner
}

/// A positive ratio of sequence growth, optionally carried as an exact fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LValue {
    value: f64,
    rational: Option<(u64, u64)>,
}

impl LValue {
    /// `p/q`, reduced to lowest terms.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidArgument(format!("L = {p}/{q} must be positive")));
        }
        let g = p.gcd(&q);
        let (p, q) = (p / g, q / g);
        Ok(LValue {
            value: p as f64 / q as f64,
            rational: Some((p, q)),
        })
    }

    /// A value with no rational form attached.
    pub fn real(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!("L = {value} must be positive and finite")));
        }
        Ok(LValue { value, rational: None })
    }

    /// Attach a rational form when a convergent with denominator at most
    /// [`MAX_DENOMINATOR`] reproduces `value` to 1e-12 relative error.
    pub fn recognize(value: f64) -> Result<Self> {
        let real = Self::real(value)?;
        match contfrac::recognize_f64(value, MAX_DENOMINATOR, 1e-12) {
            Some((p, q)) => Self::rational(p, q),
            None => Ok(real),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rational_form(&self) -> Option<(u64, u64)> {
        self.rational
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rational {
            Some((p, 1)) => write!(f, "{p}"),
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// `p/q` parses exactly; a decimal parses as a real with no rational form.
impl FromStr for LValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let parse = |t: &str| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("`{s}` is not of the form p/q")))
            };
            return Self::rational(parse(p)?, parse(q)?);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("`{s}` is not a number or p/q")))?;
        Self::real(v)
    }
}

/// Truncated evaluator of `f_L(x) = Σ_{|m| <= order} f_{m,L}(x)`.
///
/// Immutable once built; the argument is first reduced to `[0, 1]` by
/// periodicity so the window is centred on the cell that carries the mass.
#[derive(Clone, Debug, PartialEq)]
pub struct FlEvaluator {
    l: LValue,
    order: usize,
    tol: Option<f64>,
}

impl FlEvaluator {
    /// Evaluator certified to `tol` by the doubling rule of [`choose_truncation`].
    pub fn new(l: LValue, tol: f64) -> Result<Self> {
        let m = choose_truncation(l.value(), tol)?;
        Ok(FlEvaluator {
            l,
            order: 2 * m,
            tol: Some(tol),
        })
    }

    /// Evaluator with an explicit window `|m| <= order` and no certificate.
    pub fn with_order(l: LValue, order: usize) -> Self {
        FlEvaluator { l, order, tol: None }
    }

    pub fn l(&self) -> LValue {
        self.l
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tol(&self) -> Option<f64> {
        self.tol
    }

    pub fn eval(&self, x: f64) -> f64 {
        lattice_sum(self.l.value(), reduce(x), self.order)
    }
}

/// `f_L(x)` through an evaluator.
pub fn f_l(evaluator: &FlEvaluator, x: f64) -> f64 {
    evaluator.eval(x)
}

#[inline]
fn reduce(x: f64) -> f64 {
    x - x.floor()
}

/// `Σ_{|m| <= order} f_term(m, l, x)`, summed in increasing `m`, reusing the
/// cube roots shared by neighbouring terms.
fn lattice_sum(l: f64, x: f64, order: usize) -> f64 {
    band_sum(l, x, -(order as i64), order as i64)
}

/// `Σ_{lo <= m <= hi} f_term(m, l, x)`.
fn band_sum(l: f64, x: f64, lo: i64, hi: i64) -> f64 {
    let mut sum = 0.0;
    let prev = x - (lo - 1) as f64;
    let mut a_prev = cbrt_abs(prev);
    let mut b_prev = cbrt_abs(prev - l);
    for m in lo..=hi {
        let cur = x - m as f64;
        let a = cbrt_abs(cur);
        let b = cbrt_abs(cur - l);
        let inner = a_prev + b - a - b_prev;
        sum += inner * inner * inner;
        a_prev = a;
        b_prev = b;
    }
    sum
}

/// `f_L` at order `2M` minus `f_L` at order `M`, i.e. the band `M < |m| <= 2M`.
fn doubling_increment(l: f64, x: f64, m: usize) -> f64 {
    let (m, mm) = (m as i64, 2 * m as i64);
    band_sum(l, x, -mm, -m - 1) + band_sum(l, x, m + 1, mm)
}

fn probe_grid() -> impl Iterator<Item = f64> {
    (0..PROBE_POINTS).map(|i| i as f64 / (PROBE_POINTS - 1) as f64)
}

/// Maximum over the probe grid of `|f_L order 2M - f_L order M|`.
pub fn probe_increment(l: f64, m: usize) -> f64 {
    probe_grid()
        .map(|x| doubling_increment(l, x, m).abs())
        .fold(0.0, f64::max)
}

/// Smallest `M` in `64, 128, 256, ...` whose doubling increment on the probe
/// grid is below `tol / 2`. Evaluators built from it use order `2M`.
pub fn choose_truncation(l: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidArgument(format!("L = {l} must be positive and finite")));
    }
    let mut m = SCHEDULE_START;
    while m <= MAX_ORDER {
        if probe_increment(l, m) < tol / 2.0 {
            return Ok(m);
        }
        m *= 2;
    }
    Err(Error::NonConvergence { tol, cap: MAX_ORDER })
}

#[inline]
fn kappa_kernel(m: u64) -> f64 {
    let c = |k: u64| (k as f64).cbrt();
    let inner = c(m + 1) + c(m.abs_diff(1)) - 2.0 * c(m);
    inner * inner * inner
}

/// `(3/4) Σ_{|m| <= order}` of the variance kernel, summed from the tail in.
pub fn kappa_squared_at_order(order: usize) -> f64 {
    let tail: f64 = (1..=order as u64).rev().map(kappa_kernel).sum();
    0.75 * (kappa_kernel(0) + 2.0 * tail)
}

/// `κ²` together with the truncation order the doubling rule settled on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaSquared {
    pub value: f64,
    pub order: usize,
}

pub fn kappa_squared_truncated(tol: f64) -> Result<KappaSquared> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let mut m = SCHEDULE_START;
    while m <= MAX_ORDER {
        let band: f64 = (m as u64 + 1..=2 * m as u64).rev().map(kappa_kernel).sum();
        if (1.5 * band).abs() < tol / 2.0 {
            let order = 2 * m;
            return Ok(KappaSquared {
                value: kappa_squared_at_order(order),
                order,
            });
        }
        m *= 2;
    }
    Err(Error::NonConvergence { tol, cap: MAX_ORDER })
}

/// `κ² = (3/4) Σ_m (|m+1|^{1/3} + |m-1|^{1/3} - 2|m|^{1/3})³`.
pub fn kappa_squared(tol: f64) -> Result<f64> {
    kappa_squared_truncated(tol).map(|k| k.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_term_spot_values() {
        assert_eq!(f_term(0, 1.0, 0.0), 8.0);
        assert!((f_term(0, 2.0, 0.0) - 2.0).abs() < 1e-14);
        let v = f_term(7, 1.5, 0.3);
        let direct = ((0.3f64 - 6.0).abs().cbrt() + (0.3f64 - 8.5).abs().cbrt()
            - (0.3f64 - 7.0).abs().cbrt()
            - (0.3f64 - 7.5).abs().cbrt())
        .powi(3);
        assert!((v - direct).abs() < 1e-15);
        assert!(v.abs() <= 8.0);
    }

    #[test]
    fn series_matches_term_sum() {
        let l = 1.5;
        let ev = FlEvaluator::with_order(LValue::real(l).unwrap(), 40);
        let x = 0.37;
        let direct: f64 = (-40..=40).map(|m| f_term(m, l, x)).sum();
        assert_eq!(ev.eval(x), direct);
    }

    #[test]
    fn kappa_m0_term() {
        assert_eq!(0.75 * kappa_kernel(0), 6.0);
        assert_eq!(kappa_squared_at_order(0), 6.0);
    }

    #[test]
    fn f1_at_zero_is_kappa_series() {
        let ev = FlEvaluator::new(LValue::rational(1, 1).unwrap(), 1e-10).unwrap();
        let k = kappa_squared(1e-10).unwrap();
        assert!((0.75 * ev.eval(0.0) - k).abs() < 2e-10);
        assert!((ev.eval(0.0) - 4.0 / 3.0 * k).abs() < 2e-10 * 4.0 / 3.0);
    }

    #[test]
    fn truncation_examples() {
        assert!(choose_truncation(1.0, 1e-6).unwrap() <= 1024);
        assert!(choose_truncation(1.5, 1e-10).unwrap() > choose_truncation(1.5, 1e-6).unwrap());
        let golden = 1.6180339887;
        assert!(choose_truncation(golden, 1e-8).is_ok());
    }

    #[test]
    fn truncation_rejects_bad_input() {
        assert!(matches!(choose_truncation(1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(choose_truncation(-1.0, 1e-6), Err(Error::InvalidArgument(_))));
        // The schedule runs out before a tolerance this small is met.
        assert!(matches!(
            choose_truncation(1.0, 1e-300),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn lvalue_parsing() {
        let l: LValue = "6/4".parse().unwrap();
        assert_eq!(l.rational_form(), Some((3, 2)));
        assert_eq!(l.value(), 1.5);
        let r: LValue = "1.5".parse().unwrap();
        assert!(!r.is_rational());
        assert_eq!(LValue::recognize(1.5).unwrap().rational_form(), Some((3, 2)));
        assert!("0/3".parse::<LValue>().is_err());
        assert!("abc".parse::<LValue>().is_err());
        assert!("-2".parse::<LValue>().is_err());
        assert_eq!(l.to_string(), "3/2");
    }

    #[test]
    fn period_one() {
        let ev = FlEvaluator::new(LValue::rational(3, 2).unwrap(), 1e-8).unwrap();
        assert!((ev.eval(0.37) - ev.eval(1.37)).abs() <= 2e-8);
    }

    #[test]
    fn reflection_symmetry_example() {
        // L = 3/2, eta = 1, x = 0.2: f_L(1.3) = f_L(3.2).
        let ev = FlEvaluator::new(LValue::rational(3, 2).unwrap(), 1e-8).unwrap();
        assert!((ev.eval(1.5 - 0.2) - ev.eval(2.0 * 1.5 + 0.2)).abs() <= 2e-8);
    }
}
