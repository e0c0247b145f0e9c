//! Monte Carlo paths of fBm (`H = 1/6`), the cubic variations `W_n`, and the
//! limit process `X^ρ`.
//!
//! Replica `r` of a run with master seed `s` draws from ChaCha20 keyed by
//! `seed_from_u64(s)` on stream `r`, so a replica's path does not depend on
//! how many replicas are requested or on thread scheduling. Reductions run
//! over fixed replica order.

mod fgn;
mod xrho;

pub use fgn::{fgn_autocov, FgnMethod, FgnSampler, DENSE_LIMIT, EIGEN_FLOOR};
pub use xrho::{sigma_matrix, sim_xrho, XrhoEnsemble, XrhoSimulator, XrhoSummary};

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::steps_within;

/// Per-replica generator.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Sample mean with its standard error `sd / sqrt(R)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            replicas: n,
        }
    }

    /// `|mean - target| <= k · std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Seeded fBm paths on the grid `j/N`, `j = 0..=⌊NT⌋`.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    pub grid_size: u64,
    pub horizon: f64,
    pub replicas: usize,
    pub seed: u64,
    pub paths: Vec<Vec<f64>>,
    pub provenance: String,
}

fn ensemble_sampler(grid: u64, horizon: f64, method: FgnMethod) -> Result<FgnSampler> {
    if grid == 0 || !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidGrid(format!("grid {grid} and horizon {horizon}")));
    }
    let len = steps_within(grid, horizon);
    if len == 0 {
        return Err(Error::InvalidGrid(format!("N·T = {} < 1", grid as f64 * horizon)));
    }
    // Increments over a step 1/N have standard deviation N^{-1/6}.
    FgnSampler::new(len as usize, (grid as f64).powf(-1.0 / 6.0), method)
}

fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    path.push(0.0);
    for dx in increments {
        acc += dx;
        path.push(acc);
    }
    path
}

pub fn gen_fbm(grid: u64, horizon: f64, replicas: usize, seed: u64) -> Result<PathEnsemble> {
    gen_fbm_with(grid, horizon, replicas, seed, FgnMethod::Circulant)
}

pub fn gen_fbm_with(
    grid: u64,
    horizon: f64,
    replicas: usize,
    seed: u64,
    method: FgnMethod,
) -> Result<PathEnsemble> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be >= 1".into()));
    }
    let sampler = ensemble_sampler(grid, horizon, method)?;
    let paths: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| cumulative(&sampler.sample(&mut replica_rng(seed, r))))
        .collect();
    let method = match sampler.method() {
        FgnMethod::Circulant => "circulant-embedding",
        FgnMethod::Dense => "dense-cholesky",
    };
    Ok(PathEnsemble {
        grid_size: grid,
        horizon,
        replicas,
        seed,
        paths,
        provenance: format!("fgn {method} H=1/6 N={grid} T={horizon} R={replicas} seed={seed} rng=chacha20/stream=replica"),
    })
}

/// `Σ_{j=1}^{steps} (B(j·stride) - B((j-1)·stride))³` on a stored path.
fn cubic_variation(path: &[f64], stride: usize, steps: usize) -> Result<f64> {
    if steps * stride >= path.len() {
        return Err(Error::InvalidArgument("window runs past the simulated horizon".into()));
    }
    Ok((1..=steps)
        .map(|j| {
            let d = path[j * stride] - path[(j - 1) * stride];
            d * d * d
        })
        .sum())
}

/// `W_n(t)` for every replica.
pub fn w_path(ensemble: &PathEnsemble, n: u64, t: f64) -> Result<Vec<f64>> {
    if n == 0 || !ensemble.grid_size.is_multiple_of(n) {
        return Err(Error::GridMismatch { n, grid: ensemble.grid_size });
    }
    if !(t > 0.0 && t <= ensemble.horizon * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside (0, {}]",
            ensemble.horizon
        )));
    }
    let stride = (ensemble.grid_size / n) as usize;
    let steps = steps_within(n, t) as usize;
    ensemble
        .paths
        .iter()
        .map(|p| cubic_variation(p, stride, steps))
        .collect()
}

/// Empirical autocovariance of the grid increments at lags `0..=max_lag`;
/// replica `r` contributes `(1/(n-h)) Σ_i ΔB_i ΔB_{i+h}`.
pub fn increment_autocov(ensemble: &PathEnsemble, max_lag: usize) -> Vec<McEstimate> {
    let per_replica: Vec<Vec<f64>> = ensemble
        .paths
        .iter()
        .map(|p| {
            let inc: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
            (0..=max_lag)
                .map(|h| {
                    let n = inc.len().saturating_sub(h);
                    if n == 0 {
                        return 0.0;
                    }
                    inc.iter().zip(&inc[h..]).map(|(x, y)| x * y).sum::<f64>() / n as f64
                })
                .collect()
        })
        .collect();
    (0..=max_lag)
        .map(|h| McEstimate::from_samples(&per_replica.iter().map(|v| v[h]).collect::<Vec<_>>()))
        .collect()
}

/// Sample correlation of `(W_a(t), W_b(t))` over `replicas` fBm paths on the
/// grid `lcm(a, b)`.
///
/// The standard error comes from the delta method for a sample correlation
/// without assuming normality. With `x, y` standardized about their sample
/// means and `m_ij` the sample mean of `x^i y^j`,
///
/// ```text
/// Var(r) ≈ [ r²/4 (m40 + m04 + 2 m22) + m22 - r (m31 + m13) ] / R,
/// ```
///
/// which reduces to `(1 - r²)² / R` for Gaussian pairs.
pub fn mc_corr(a: u64, b: u64, t: f64, replicas: usize, seed: u64) -> Result<McEstimate> {
    let (xs, ys) = mc_pairs(a, b, t, replicas, seed)?;
    Ok(sample_correlation(&xs, &ys))
}

/// Per-replica `(W_a(t), W_b(t))`, streamed without storing paths.
pub fn mc_pairs(a: u64, b: u64, t: f64, replicas: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if a == 0 || b == 0 || replicas == 0 {
        return Err(Error::InvalidArgument("a, b and replicas must be >= 1".into()));
    }
    let grid = a.lcm(&b);
    let sampler = ensemble_sampler(grid, t, FgnMethod::Circulant)?;
    let (sa, sb) = ((grid / a) as usize, (grid / b) as usize);
    let (na, nb) = (steps_within(a, t) as usize, steps_within(b, t) as usize);
    if na == 0 || nb == 0 {
        return Err(Error::DegenerateWindow { n: a.min(b), t });
    }
    let pairs: Vec<(f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let path = cumulative(&sampler.sample(&mut replica_rng(seed, r)));
            Ok((cubic_variation(&path, sa, na)?, cubic_variation(&path, sb, nb)?))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

pub fn sample_correlation(xs: &[f64], ys: &[f64]) -> McEstimate {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let (sx, sy) = ((sxx / n).sqrt(), (syy / n).sqrt());
    let (mut m40, mut m04, mut m22, mut m31, mut m13) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (u, v) = ((x - mx) / sx, (y - my) / sy);
        let (u2, v2) = (u * u, v * v);
        m40 += u2 * u2;
        m04 += v2 * v2;
        m22 += u2 * v2;
        m31 += u2 * u * v;
        m13 += u * v2 * v;
    }
    let (m40, m04, m22, m31, m13) = (m40 / n, m04 / n, m22 / n, m31 / n, m13 / n);
    let var = (r * r / 4.0 * (m40 + m04 + 2.0 * m22) + m22 - r * (m31 + m13)) / n;
    McEstimate {
        mean: r,
        std_error: var.max(0.0).sqrt(),
        replicas: xs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_start_at_zero_and_reproduce() {
        let e1 = gen_fbm(16, 2.0, 5, 7).unwrap();
        let e2 = gen_fbm(16, 2.0, 3, 7).unwrap();
        assert!(e1.paths.iter().all(|p| p[0] == 0.0 && p.len() == 33));
        // Replica r does not depend on R.
        assert_eq!(e1.paths[..3], e2.paths[..]);
        assert_ne!(gen_fbm(16, 2.0, 1, 8).unwrap().paths[0], e1.paths[0]);
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(gen_fbm(4, 0.1, 1, 0), Err(Error::InvalidGrid(_))));
        let e = gen_fbm(12, 1.0, 2, 0).unwrap();
        assert!(matches!(w_path(&e, 5, 1.0), Err(Error::GridMismatch { n: 5, grid: 12 })));
        assert!(w_path(&e, 4, 1.5).is_err());
    }

    #[test]
    fn identical_functionals_correlate_exactly() {
        let est = mc_corr(8, 8, 1.0, 50, 3).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn gaussian_standard_error() {
        // Perfectly Gaussian-looking symmetric data: the formula stays finite.
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64 - 50.0) / 10.0).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x + ((i * 53 % 89) as f64 - 44.0) / 10.0).collect();
        let est = sample_correlation(&xs, &ys);
        assert!(est.mean > 0.0 && est.mean < 1.0);
        assert!(est.std_error > 0.0 && est.std_error < 0.2);
    }

    #[test]
    fn estimate_from_samples() {
        let e = McEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(e.within(2.6, 1.0));
    }
}
