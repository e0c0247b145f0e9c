//! Continued-fraction convergents, exact and floating.

use num_integer::Integer;

/// Convergents `p/q` of the nonnegative rational `num/den`, in order of
/// increasing denominator, stopping before the first one with `q > max_den`.
///
/// All arithmetic is on integers; the last convergent (when `den <= max_den`)
/// is `num/den` in lowest terms.
pub fn convergents(num: i128, den: i128, max_den: i128) -> Vec<(i128, i128)> {
    assert!(num >= 0 && den > 0, "convergents of a nonnegative rational");
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let (mut n, mut d) = (num, den);
    while d != 0 {
        let (a, r) = n.div_rem(&d);
        let p2 = match a.checked_mul(p1).and_then(|v| v.checked_add(p0)) {
            Some(v) => v,
            None => break,
        };
        let q2 = match a.checked_mul(q1).and_then(|v| v.checked_add(q0)) {
            Some(v) => v,
            None => break,
        };
        if q2 > max_den {
            break;
        }
        out.push((p2, q2));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        n = d;
        d = r;
    }
    out
}

/// Best rational reading of a positive float: the first convergent with
/// denominator at most `max_den` that reproduces `x` to relative error `rel_tol`.
pub fn recognize_f64(x: f64, max_den: u64, rel_tol: f64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            return None;
        }
        let a_int = a as u128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as u128 || p2 > u64::MAX as u128 {
            return None;
        }
        let approx = p2 as f64 / q2 as f64;
        if ((approx - x) / x).abs() <= rel_tol {
            return Some((p2 as u64, q2 as u64));
        }
        let frac = rest - a;
        if frac == 0.0 {
            return None;
        }
        rest = frac.recip();
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    None
}
