//! Brute-force references. Each one reaches its answer by a route that
//! shares nothing with the production code it is compared against.

use num_complex::Complex64;
use num_rational::Ratio;
use std::f64::consts::TAU;

use crate::steps_within;

/// `E[X³Y³]` by summing, over all 15 perfect matchings of `{x,x,x,y,y,y}`,
/// the product of the pair covariances.
pub fn matching_moment(c: f64, v1: f64, v2: f64) -> f64 {
    fn walk(rest: &[u8], c: f64, v1: f64, v2: f64) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest[0];
        let mut total = 0.0;
        for i in 1..rest.len() {
            let cov = match (first, rest[i]) {
                (0, 0) => v1,
                (1, 1) => v2,
                _ => c,
            };
            let remaining: Vec<u8> = rest[1..]
                .iter()
                .enumerate()
                .filter(|(j, _)| j + 1 != i)
                .map(|(_, &v)| v)
                .collect();
            total += cov * walk(&remaining, c, v1, v2);
        }
        total
    }
    walk(&[0, 0, 0, 1, 1, 1], c, v1, v2)
}

/// Number of perfect matchings the enumeration visits; `5!! = 15`.
pub fn matching_count() -> usize {
    fn count(n: usize) -> usize {
        if n == 0 {
            1
        } else {
            (n - 1) * count(n - 2)
        }
    }
    count(6)
}

/// `Σ_{j=1}^{⌊a t⌋} e^{2πi k j L}` term by term.
pub fn direct_weyl_sum(k: i64, a_n: u64, l_n: Ratio<u64>, t: f64) -> Complex64 {
    let (p, q) = (*l_n.numer() as i128, *l_n.denom() as i128);
    (1..=steps_within(a_n, t) as i128)
        .map(|j| {
            let r = (k as i128 * j * p).rem_euclid(q);
            Complex64::from_polar(1.0, TAU * r as f64 / q as f64)
        })
        .sum()
}

/// Composite midpoint rule with `panels` equal panels.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}
