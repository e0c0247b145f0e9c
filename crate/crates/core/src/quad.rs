//! Adaptive Simpson quadrature for integrands with `|x - c|^{1/3}` cusps.
//!
//! The interval is cut at every listed cusp. On each piece `[s0, s1]` the
//! variable is changed to `x = s0 + (s1 - s0) φ(u)` with the quintic
//! `φ(u) = 10u³ - 15u⁴ + 6u⁵`, whose first two derivatives vanish at both
//! ends. A cube-root cusp at either end then becomes smooth in `u`, and
//! bisection Simpson converges at its usual rate instead of stalling at the
//! cusp.

use crate::error::{Error, Result};

/// Recursion depth at which a panel gives up.
pub const MAX_DEPTH: usize = 40;
/// Initial Simpson panels per cusp-free piece.
pub const DEFAULT_PANELS: usize = 8;

#[inline]
fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

#[inline]
fn smoothstep_slope(u: f64) -> f64 {
    let v = u * (1.0 - u);
    30.0 * v * v
}

/// `∫_a^b f` with forced cuts at `cusps` (points outside `(a, b)` are ignored).
pub fn integrate_cusped<F>(f: F, a: f64, b: f64, cusps: &[f64], tol: f64, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is reversed")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = b - a;
    let eps = 1e-13 * width.max(1.0);
    let mut cuts: Vec<f64> = cusps
        .iter()
        .copied()
        .filter(|&c| c > a + eps && c < b - eps)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= eps);

    let mut knots = Vec::with_capacity(cuts.len() + 2);
    knots.push(a);
    knots.extend(cuts);
    knots.push(b);

    let panels = panels.max(1);
    let mut total = 0.0;
    for piece in knots.windows(2) {
        let (s0, s1) = (piece[0], piece[1]);
        let w = s1 - s0;
        let g = |u: f64| f(s0 + w * smoothstep(u)) * w * smoothstep_slope(u);
        let piece_tol = tol * w / width;
        let h = 1.0 / panels as f64;
        for i in 0..panels {
            let (u0, u1) = (i as f64 * h, (i + 1) as f64 * h);
            let (f0, f1) = (g(u0), g(u1));
            let fm = g(0.5 * (u0 + u1));
            let whole = simpson(u0, u1, f0, fm, f1);
            total += refine(&g, u0, u1, f0, fm, f1, whole, piece_tol / panels as f64, 0)
                .map_err(|_| Error::QuadratureDepthExceeded {
                    a: s0 + w * smoothstep(u0),
                    b: s0 + w * smoothstep(u1),
                    depth: MAX_DEPTH,
                })?;
        }
    }
    Ok(total)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> std::result::Result<f64, ()> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    // Below this width the panel is pure rounding noise.
    if b - a <= 4.0 * f64::EPSILON * a.abs().max(1.0) {
        return Ok(left + right);
    }
    if depth >= MAX_DEPTH {
        return Err(());
    }
    let l = refine(g, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?;
    let r = refine(g, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?;
    Ok(l + r)
}

/// Cusp locations of `f_L` in `[a, b]`: points congruent to 0 or `L` mod 1.
pub fn fl_cusps(l: f64, a: f64, b: f64) -> Vec<f64> {
    let shift = l - l.floor();
    let mut out = Vec::new();
    let first = a.floor() as i64 - 1;
    let last = b.ceil() as i64 + 1;
    for k in first..=last {
        for c in [k as f64, k as f64 + shift] {
            if c >= a && c <= b {
                out.push(c);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
