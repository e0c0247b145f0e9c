//! Euler scheme for `X^ρ(t) = ∫_0^t σ(s) dW(s)` with
//! `σ = κ [[√(1 - r²), r], [0, 1]]`, `r = ρ/κ²`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{replica_rng, McEstimate};
use crate::error::{Error, Result};
use crate::rho_limit::RhoFunction;

/// Slack on `1 - r²` below which σ is declared complex.
const SIGMA_SLACK: f64 = 1e-12;
const CHUNK: usize = 256;

/// Per-time sums of `x₁², x₂², x₁x₂`, and the same products at the horizon per replica.
type ChunkMoments = (Vec<[f64; 3]>, Vec<[f64; 3]>);

/// `σ(s)`, row-major.
pub fn sigma_matrix(rho: &RhoFunction, s: f64) -> Result<[[f64; 2]; 2]> {
    let kappa2 = rho.kappa2();
    let r = rho.eval(s) / kappa2;
    let value = 1.0 - r * r;
    if value < -SIGMA_SLACK {
        return Err(Error::SigmaNotReal { s, value });
    }
    let kappa = kappa2.sqrt();
    Ok([[kappa * value.max(0.0).sqrt(), kappa * r], [0.0, kappa]])
}

/// Left-endpoint diffusion coefficients on a fixed step grid.
pub struct XrhoSimulator {
    horizon: f64,
    steps: usize,
    dt: f64,
    sigmas: Vec<[[f64; 2]; 2]>,
}

impl XrhoSimulator {
    pub fn new(rho: &RhoFunction, horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon {horizon} with {steps} steps")));
        }
        let dt = horizon / steps as f64;
        let sigmas = (0..steps)
            .map(|i| sigma_matrix(rho, i as f64 * dt))
            .collect::<Result<_>>()?;
        Ok(XrhoSimulator {
            horizon,
            steps,
            dt,
            sigmas,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| i as f64 * self.dt).collect()
    }

    /// Path of replica `r`, starting at the origin.
    pub fn replica(&self, seed: u64, r: u64) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.steps + 1);
        self.walk(seed, r, |x| out.push(x));
        out
    }

    fn walk(&self, seed: u64, r: u64, mut visit: impl FnMut([f64; 2])) {
        let mut rng = replica_rng(seed, r);
        let sq = self.dt.sqrt();
        let mut x = [0.0, 0.0];
        visit(x);
        for s in &self.sigmas {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            x[0] += sq * (s[0][0] * z1 + s[0][1] * z2);
            x[1] += sq * (s[1][0] * z1 + s[1][1] * z2);
            visit(x);
        }
    }

    /// Second moments across replicas at every grid time, streamed in fixed
    /// replica order.
    pub fn summarize(&self, replicas: usize, seed: u64) -> XrhoSummary {
        let len = self.steps + 1;
        let chunks: Vec<ChunkMoments> = (0..replicas.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![[0.0; 3]; len];
                let mut terminal = Vec::with_capacity(CHUNK);
                for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                    let mut i = 0;
                    let mut last = [0.0; 2];
                    self.walk(seed, r as u64, |x| {
                        acc[i][0] += x[0] * x[0];
                        acc[i][1] += x[1] * x[1];
                        acc[i][2] += x[0] * x[1];
                        last = x;
                        i += 1;
                    });
                    terminal.push([last[0] * last[0], last[1] * last[1], last[0] * last[1]]);
                }
                (acc, terminal)
            })
            .collect();
        let mut sums = vec![[0.0; 3]; len];
        let mut terminal = Vec::with_capacity(replicas);
        for (acc, term) in chunks {
            for (s, a) in sums.iter_mut().zip(acc) {
                for k in 0..3 {
                    s[k] += a[k];
                }
            }
            terminal.extend(term);
        }
        let n = replicas as f64;
        let column = |k: usize| terminal.iter().map(|v| v[k]).collect::<Vec<_>>();
        XrhoSummary {
            times: self.times(),
            var1: sums.iter().map(|s| s[0] / n).collect(),
            var2: sums.iter().map(|s| s[1] / n).collect(),
            cov: sums.iter().map(|s| s[2] / n).collect(),
            terminal_var1: McEstimate::from_samples(&column(0)),
            terminal_var2: McEstimate::from_samples(&column(1)),
            terminal_cov: McEstimate::from_samples(&column(2)),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Mean-zero second moments of `X^ρ` (component means are zero exactly).
#[derive(Clone, Debug, Serialize)]
pub struct XrhoSummary {
    pub times: Vec<f64>,
    pub var1: Vec<f64>,
    pub var2: Vec<f64>,
    pub cov: Vec<f64>,
    pub terminal_var1: McEstimate,
    pub terminal_var2: McEstimate,
    pub terminal_cov: McEstimate,
}

#[derive(Clone, Debug)]
pub struct XrhoEnsemble {
    pub horizon: f64,
    pub steps: usize,
    pub replicas: usize,
    pub seed: u64,
    pub paths: Vec<Vec<[f64; 2]>>,
}

pub fn sim_xrho(rho: &RhoFunction, horizon: f64, steps: usize, replicas: usize, seed: u64) -> Result<XrhoEnsemble> {
    let sim = XrhoSimulator::new(rho, horizon, steps)?;
    let paths = (0..replicas as u64)
        .into_par_iter()
        .map(|r| sim.replica(seed, r))
        .collect();
    Ok(XrhoEnsemble {
        horizon,
        steps,
        replicas,
        seed,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streaming_matches_stored_paths() {
        let rho = RhoFunction::rational(1, 1, 1.0, 1e-8).unwrap();
        let sim = XrhoSimulator::new(&rho, 1.0, 16).unwrap();
        let ens = sim_xrho(&rho, 1.0, 16, 300, 11).unwrap();
        let summary = sim.summarize(300, 11);
        let direct: f64 = ens.paths.iter().map(|p| p[16][0] * p[16][1]).sum::<f64>() / 300.0;
        assert!((summary.terminal_cov.mean - direct).abs() < 1e-12);
        assert!(ens.paths.iter().all(|p| p[0] == [0.0, 0.0]));
    }

    #[test]
    fn zero_density_decouples() {
        let rho = RhoFunction::independent(1e-8).unwrap();
        let s = sigma_matrix(&rho, 0.3).unwrap();
        assert_eq!(s[0][1], 0.0);
        assert!((s[0][0] - s[1][1]).abs() < 1e-15);
    }
}
