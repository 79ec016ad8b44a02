use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_DERIVATIVE: usize = 4;

/// Probabilists' Hermite polynomial He_n(x).
pub fn hermite_prob(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = x * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Physicists' Hermite polynomial H_n(x).
pub fn hermite_phys(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * x * b - 2.0 * k as f64 * a;
        a = b;
        b = c;
    }
    b
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Normalized Gaussian-Hermite function of order i at scale sigma.
pub fn gh_function(i: usize, x: f64, sigma: f64) -> f64 {
    let norm = (2f64.powi(i as i32) * factorial(i) * PI.sqrt() * sigma).sqrt();
    (-x * x / (2.0 * sigma * sigma)).exp() * hermite_phys(i, x / sigma) / norm
}

/// i-th derivative of the 1-D Gaussian of standard deviation sigma.
pub fn gaussian_derivative(i: usize, x: f64, sigma: f64) -> f64 {
    let t = x / sigma;
    let g = (-0.5 * t * t).exp() / ((2.0 * PI).sqrt() * sigma);
    let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite_prob(i, t) * g / sigma.powi(i as i32)
}

/// Smallest odd integer >= 8 sigma + 1.
pub fn default_size(sigma: f64) -> usize {
    let s = (8.0 * sigma + 1.0).ceil() as usize;
    if s.is_multiple_of(2) {
        s + 1
    } else {
        s
    }
}

/// Separable Gaussian-derivative filters sigma^i d^i G / dx^i, i = 0..=4, sampled at
/// integer offsets -r..=r.
///
/// The smoothing filter is renormalized to sum to 1. Odd filters are made exactly
/// antisymmetric, so they sum to 0. Higher moments are left as sampled, which keeps the
/// filters rotation-consistent when the window truncates the Gaussian.
#[derive(Debug, Clone)]
pub struct KernelStack {
    sigma: f64,
    size: usize,
    raw: Vec<Vec<f64>>,
    kernels: Vec<Vec<f64>>,
}

impl KernelStack {
    pub fn new(sigma: f64, size: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Kernel(format!("sigma must be positive, got {sigma}")));
        }
        if size.is_multiple_of(2) {
            return Err(Error::Kernel(format!("kernel size must be odd, got {size}")));
        }
        let r = (size / 2) as isize;
        let offsets: Vec<f64> = (-r..=r).map(|d| d as f64).collect();
        let raw: Vec<Vec<f64>> = (0..=MAX_DERIVATIVE)
            .map(|i| offsets.iter().map(|&x| gaussian_derivative(i, x, sigma)).collect())
            .collect();
        let mut kernels = Vec::with_capacity(MAX_DERIVATIVE + 1);
        for (i, samples) in raw.iter().enumerate() {
            let mut k: Vec<f64> = samples.iter().map(|v| v * sigma.powi(i as i32)).collect();
            if i == 0 {
                let total: f64 = k.iter().sum();
                k.iter_mut().for_each(|v| *v /= total);
            }
            let parity = if i % 2 == 0 { 1.0 } else { -1.0 };
            for n in 0..size / 2 {
                let m = size - 1 - n;
                let v = 0.5 * (k[n] + parity * k[m]);
                k[n] = v;
                k[m] = parity * v;
            }
            if i % 2 == 1 {
                k[size / 2] = 0.0;
            }
            kernels.push(k);
        }
        Ok(KernelStack { sigma, size, raw, kernels })
    }

    pub fn with_default_size(sigma: f64) -> Result<Self> {
        Self::new(sigma, default_size(sigma))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    /// Normalized 1-D filter sigma^i G^(i), indexed by offset + radius.
    pub fn kernel_1d(&self, i: usize) -> &[f64] {
        &self.kernels[i]
    }

    /// Uncorrected samples of G^(i)(x; sigma), without the sigma^i factor.
    pub fn raw_1d(&self, i: usize) -> &[f64] {
        &self.raw[i]
    }

    /// Row-major 2-D grid of the normalized filter for (i, j); x varies along rows.
    pub fn kernel_2d(&self, i: usize, j: usize) -> Vec<f64> {
        let (kx, ky) = (&self.kernels[i], &self.kernels[j]);
        ky.iter().flat_map(|&b| kx.iter().map(move |&a| a * b)).collect()
    }
}

/// Sampled grid of sigma^(i+j) d^(i+j) G / dx^i dy^j.
pub fn gaussian_derivative_kernel(i: usize, j: usize, sigma: f64, size: usize) -> Result<Vec<f64>> {
    if i + j > MAX_DERIVATIVE {
        return Err(Error::Kernel(format!("derivative order {} exceeds {MAX_DERIVATIVE}", i + j)));
    }
    Ok(KernelStack::new(sigma, size)?.kernel_2d(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_phys(2, 1.5), 4.0 * 2.25 - 2.0);
        assert_eq!(hermite_phys(3, 0.5), 8.0 * 0.125 - 12.0 * 0.5);
        assert_eq!(hermite_prob(4, 2.0), 16.0 - 6.0 * 4.0 + 3.0);
    }

    #[test]
    fn size_rule() {
        assert_eq!(default_size(1.0), 9);
        assert_eq!(default_size(1.5), 13);
        assert_eq!(default_size(8.0), 65);
        assert_eq!(default_size(0.3), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KernelStack::new(2.0, 10).is_err());
        assert!(KernelStack::new(0.0, 9).is_err());
        assert!(KernelStack::new(-1.0, 9).is_err());
        assert!(gaussian_derivative_kernel(3, 2, 1.0, 9).is_err());
    }

    #[test]
    fn sums_and_parity() {
        for (sigma, size) in [(1.0, 9), (2.5, 21), (12.0, 65), (20.0, 65)] {
            let ks = KernelStack::new(sigma, size).unwrap();
            let g = gaussian_derivative_kernel(0, 0, sigma, size).unwrap();
            assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let k = gaussian_derivative_kernel(1, 0, sigma, size).unwrap();
            assert!(k.iter().sum::<f64>().abs() < 1e-12);
            for i in 0..=4 {
                let k = ks.kernel_1d(i);
                for n in 0..size {
                    let mirrored = k[size - 1 - n];
                    if i % 2 == 0 {
                        assert_eq!(k[n], mirrored);
                    } else {
                        assert_eq!(k[n], -mirrored);
                    }
                }
            }
        }
    }

    /// int t^m sigma^i G^(i)(x) dx with t = x / sigma.
    fn continuous_moment(i: usize, m: usize) -> f64 {
        if m < i || (m - i) % 2 == 1 {
            return 0.0;
        }
        let gauss: f64 = (1..m - i).step_by(2).map(|k| k as f64).product();
        let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * factorial(m) / factorial(m - i) * gauss
    }

    #[test]
    fn wide_window_moments() {
        let ks = KernelStack::new(3.0, 61).unwrap();
        let r = ks.radius() as isize;
        for i in 0..=4 {
            for m in 0..=4 {
                let got: f64 =
                    ks.kernel_1d(i).iter().zip(-r..=r).map(|(k, d)| k * (d as f64 / 3.0).powi(m as i32)).sum();
                assert!((got - continuous_moment(i, m)).abs() < 1e-10, "i={i} m={m} got={got}");
            }
        }
    }
}
