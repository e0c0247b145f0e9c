//! Fractional Gaussian noise with `H = 1/6`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Eigenvalues above `-EIGEN_FLOOR` are rounding noise and clamp to zero.
pub const EIGEN_FLOOR: f64 = 1e-9;
/// Largest sample the dense fallback accepts.
pub const DENSE_LIMIT: usize = 4096;

/// Unit-lag autocovariance `γ(h) = ½(|h+1|^{1/3} + |h-1|^{1/3} - 2|h|^{1/3})`.
pub fn fgn_autocov(h: usize) -> f64 {
    let c = |k: usize| (k as f64).cbrt();
    0.5 * (c(h + 1) + c(h.abs_diff(1)) - 2.0 * c(h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FgnMethod {
    /// Circulant embedding, falling back to `Dense` when the embedding fails
    /// and the sample is small enough.
    Circulant,
    /// Lower Cholesky factor of the Toeplitz covariance.
    Dense,
}

enum Kernel {
    Circulant {
        weights: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Dense {
        factor: Vec<f64>,
    },
}

/// Draws `len` consecutive increments with covariance `scale² γ(h)`.
pub struct FgnSampler {
    len: usize,
    scale: f64,
    kernel: Kernel,
}

impl FgnSampler {
    pub fn new(len: usize, scale: f64, method: FgnMethod) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidGrid("no increments to sample".into()));
        }
        let kernel = match method {
            FgnMethod::Dense => dense_kernel(len)?,
            FgnMethod::Circulant => match circulant_kernel(len) {
                Ok(k) => k,
                Err(Error::EmbeddingNotPsd { .. }) if len <= DENSE_LIMIT => dense_kernel(len)?,
                Err(e) => return Err(e),
            },
        };
        Ok(FgnSampler { len, scale, kernel })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn method(&self) -> FgnMethod {
        match self.kernel {
            Kernel::Circulant { .. } => FgnMethod::Circulant,
            Kernel::Dense { .. } => FgnMethod::Dense,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kernel {
            Kernel::Circulant { weights, fft } => {
                let mut buf: Vec<Complex<f64>> = weights
                    .iter()
                    .map(|&w| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(w * re, w * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.iter().take(self.len).map(|z| self.scale * z.re).collect()
            }
            Kernel::Dense { factor } => {
                let z: Vec<f64> = (0..self.len).map(|_| rng.sample(StandardNormal)).collect();
                (0..self.len)
                    .map(|i| {
                        let row = &factor[i * self.len..i * self.len + i + 1];
                        self.scale * row.iter().zip(&z).map(|(l, z)| l * z).sum::<f64>()
                    })
                    .collect()
            }
        }
    }
}

/// Davies–Harte: embed the `len × len` Toeplitz covariance in a circulant of
/// size `2m`, `m >= len` a power of two, and colour complex white noise by
/// the square roots of its eigenvalues. The real part of one FFT is an exact
/// sample.
fn circulant_kernel(len: usize) -> Result<Kernel> {
    let m = len.next_power_of_two();
    let size = 2 * m;
    let mut row: Vec<Complex<f64>> = (0..size)
        .map(|k| Complex::new(fgn_autocov(if k <= m { k } else { size - k }), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);
    let mut weights = Vec::with_capacity(size);
    for z in &row {
        let lambda = z.re;
        if lambda < -EIGEN_FLOOR {
            return Err(Error::EmbeddingNotPsd { eigenvalue: lambda });
        }
        weights.push((lambda.max(0.0) / size as f64).sqrt());
    }
    Ok(Kernel::Circulant { weights, fft })
}

fn dense_kernel(len: usize) -> Result<Kernel> {
    if len > DENSE_LIMIT {
        return Err(Error::InvalidGrid(format!(
            "dense generation is limited to {DENSE_LIMIT} increments (got {len})"
        )));
    }
    let gamma: Vec<f64> = (0..len).map(fgn_autocov).collect();
    let mut l = vec![0.0; len * len];
    for i in 0..len {
        for j in 0..=i {
            let mut s = gamma[i - j];
            for k in 0..j {
                s -= l[i * len + k] * l[j * len + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::InvalidGrid("covariance is not positive definite".into()));
                }
                l[i * len + i] = s.sqrt();
            } else {
                l[i * len + j] = s / l[j * len + j];
            }
        }
    }
    Ok(Kernel::Dense { factor: l })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocov_values() {
        assert_eq!(fgn_autocov(0), 1.0);
        assert!((fgn_autocov(1) - 0.5 * (2f64.cbrt() - 2.0)).abs() < 1e-15);
        assert!(fgn_autocov(1) < 0.0);
    }

    #[test]
    fn embedding_is_nonnegative() {
        for len in [1, 7, 64, 1000] {
            let s = FgnSampler::new(len, 1.0, FgnMethod::Circulant).unwrap();
            assert_eq!(s.method(), FgnMethod::Circulant);
        }
    }

    #[test]
    fn dense_limit() {
        assert!(FgnSampler::new(DENSE_LIMIT + 1, 1.0, FgnMethod::Dense).is_err());
        assert!(FgnSampler::new(0, 1.0, FgnMethod::Dense).is_err());
    }
}
