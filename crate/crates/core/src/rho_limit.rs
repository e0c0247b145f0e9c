//! Limit covariance density `ρ(t)` of `(W_{a_n}, W_{b_n})` and the derived
//! correlation curve.
//!
//! Two regimes carry a nonzero density:
//!
//! * rational `L = p/q` with `a_n|δ_n| → k < ∞`:
//!   `ρ(t) = 3/(4p) Σ_{j=1}^q f_L(j/q + kt)`;
//! * rational with `k = ∞`, or irrational `L`: `ρ = 3/(4L) ∫_0^1 f_L`, constant.
//!
//! Ratios tending to 0 or ∞ give independent limits and `ρ ≡ 0`.

use crate::error::{Error, Result};
use crate::flseries::{kappa_squared_at_order, FlEvaluator, LValue};
use crate::quad::{self, fl_cusps, integrate_cusped};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    RationalFiniteK { p: u64, q: u64, k: f64 },
    Averaged { l: LValue },
    /// `L ∈ {0, ∞}`: the two components decouple.
    Independent,
}

/// `ρ` for one regime, with the `κ²` used to normalize it.
///
/// `κ²` is taken at the evaluator's truncation order, so that `ρ(t) = κ²`
/// wherever the two series coincide term by term (e.g. `p = q = 1` at
/// `{kt} = 0`) and `|ρ/κ²| <= 1` holds to rounding.
#[derive(Clone, Debug)]
pub struct RhoFunction {
    regime: Regime,
    kappa2: f64,
    evaluator: FlEvaluator,
    constant: Option<f64>,
}

impl RhoFunction {
    pub fn rational(p: u64, q: u64, k: f64, tol: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k = {k} must be finite and >= 0")));
        }
        let l = LValue::rational(p, q)?;
        if l.rational_form() != Some((p, q)) {
            return Err(Error::InvalidArgument(format!("p = {p} and q = {q} are not coprime")));
        }
        let evaluator = FlEvaluator::new(l, tol / q as f64)?;
        let kappa2 = kappa_squared_at_order(evaluator.order());
        Ok(RhoFunction {
            regime: Regime::RationalFiniteK { p, q, k },
            kappa2,
            evaluator,
            constant: None,
        })
    }

    pub fn averaged(l: LValue, tol: f64) -> Result<Self> {
        let lv = l.value();
        let int_tol = tol * 4.0 * lv / 3.0;
        let evaluator = FlEvaluator::new(l, int_tol / 2.0)?;
        let integral = integrate_fl_with(&evaluator, 0.0, 1.0, int_tol / 2.0, quad::DEFAULT_PANELS)?;
        let kappa2 = kappa_squared_at_order(evaluator.order());
        Ok(RhoFunction {
            regime: Regime::Averaged { l },
            kappa2,
            evaluator,
            constant: Some(0.75 / lv * integral),
        })
    }

    pub fn independent(tol: f64) -> Result<Self> {
        let evaluator = FlEvaluator::new(LValue::rational(1, 1)?, tol)?;
        let kappa2 = kappa_squared_at_order(evaluator.order());
        Ok(RhoFunction {
            regime: Regime::Independent,
            kappa2,
            evaluator,
            constant: Some(0.0),
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    pub fn evaluator(&self) -> &FlEvaluator {
        &self.evaluator
    }

    /// `ρ(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match (self.regime, self.constant) {
            (_, Some(c)) => c,
            (Regime::RationalFiniteK { p, q, k }, None) => {
                let sum: f64 = (1..=q)
                    .map(|j| self.evaluator.eval(j as f64 / q as f64 + k * t))
                    .sum();
                0.75 / p as f64 * sum
            }
            _ => unreachable!("only the finite-k regime is t-dependent"),
        }
    }

    /// `∫_0^t ρ(s) ds` to absolute error `tol`.
    pub fn integral(&self, t: f64, tol: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t = {t} must be >= 0")));
        }
        match (self.regime, self.constant) {
            (_, Some(c)) => Ok(c * t),
            (Regime::RationalFiniteK { p, q, k }, None) => {
                if k == 0.0 {
                    return Ok(self.eval(0.0) * t);
                }
                // ∫_0^t f_L(j/q + ks) ds = (1/k) ∫_{j/q}^{j/q + kt} f_L
                let scale = 0.75 / (p as f64 * k);
                let per_tol = tol / (scale * q as f64);
                let mut total = 0.0;
                for j in 1..=q {
                    let a = j as f64 / q as f64;
                    total += integrate_fl_with(&self.evaluator, a, a + k * t, per_tol, quad::DEFAULT_PANELS)?;
                }
                Ok(scale * total)
            }
            _ => unreachable!("only the finite-k regime is t-dependent"),
        }
    }
}

/// `3/(4p) Σ_{j=1}^q f_{p/q}(j/q + kt)`.
pub fn rho_rational(p: u64, q: u64, k: f64, t: f64, tol: f64) -> Result<f64> {
    Ok(RhoFunction::rational(p, q, k, tol)?.eval(t))
}

/// `3/(4L) ∫_0^1 f_L`.
pub fn rho_averaged(l: LValue, tol: f64) -> Result<f64> {
    Ok(RhoFunction::averaged(l, tol)?.eval(0.0))
}

/// `∫_a^b f_L` to absolute error `tol`, letting the evaluator absorb half the budget.
pub fn integrate_fl(l: LValue, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_fl_panels(l, a, b, tol, quad::DEFAULT_PANELS)
}

/// As [`integrate_fl`], with an explicit number of initial Simpson panels per piece.
pub fn integrate_fl_panels(l: LValue, a: f64, b: f64, tol: f64, panels: usize) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is reversed")));
    }
    if a == b {
        return Ok(0.0);
    }
    let evaluator = FlEvaluator::new(l, tol / (2.0 * (b - a).max(1.0)))?;
    integrate_fl_with(&evaluator, a, b, tol / 2.0, panels)
}

/// `∫_a^b` of the evaluator's truncated `f_L`. Whole periods are folded onto
/// `∫_0^1`, so long windows cost the same as short ones.
pub fn integrate_fl_with(ev: &FlEvaluator, a: f64, b: f64, tol: f64, panels: usize) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is reversed")));
    }
    let l = ev.l().value();
    let f = |x: f64| ev.eval(x);
    let periods = (b - a).floor();
    if periods < 1.0 {
        return integrate_cusped(f, a, b, &fl_cusps(l, a, b), tol, panels);
    }
    let start = a + periods;
    let cell = integrate_cusped(f, 0.0, 1.0, &fl_cusps(l, 0.0, 1.0), tol / (2.0 * periods), panels)?;
    let rest = integrate_cusped(f, start, b, &fl_cusps(l, start, b), tol / 2.0, panels)?;
    Ok(periods * cell + rest)
}

/// `(1/(κ² t)) ∫_0^t ρ(s) ds`, the correlation of the two limit coordinates at time `t`.
pub fn correlation_curve(rho: &RhoFunction, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be > 0")));
    }
    let k2 = rho.kappa2();
    Ok(rho.integral(t, tol * k2 * t)? / (k2 * t))
}
