//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerical routines.
#![allow(dead_code)]

use std::f64::consts::PI;

use lfmimo::numerics::{CMatrix, CVector};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest eigenvalue of the Gram matrix of a 2-column matrix, by the
/// closed-form quadratic for a 2x2 Hermitian matrix [[p, q], [q*, r]].
pub fn sigma_max_sq_2col(a: &CMatrix) -> f64 {
    assert_eq!(a.cols(), 2);
    let (mut p, mut r, mut q) = (0.0, 0.0, c(0.0, 0.0));
    for i in 0..a.rows() {
        let (x, y) = (a[(i, 0)], a[(i, 1)]);
        p += x.norm_sqr();
        r += y.norm_sqr();
        q += x.conj() * y;
    }
    let mean = (p + r) / 2.0;
    let half_diff = (p - r) / 2.0;
    mean + (half_diff * half_diff + q.norm_sqr()).sqrt()
}

/// Average BPSK BER with L-branch maximal ratio combining over i.i.d.
/// Rayleigh branches of average SNR `gamma` (linear).
pub fn mrc_bpsk_ber(gamma: f64, branches: u32) -> f64 {
    let mu = (gamma / (1.0 + gamma)).sqrt();
    let p = 0.5 * (1.0 - mu);
    match branches {
        1 => p,
        2 => p * p * (1.0 + 2.0 * (1.0 - p)),
        _ => unimplemented!("only 1 or 2 branches"),
    }
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Box-Muller complex Gaussian, independent of the library's sampler.
pub fn cn<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-var * u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * PI * u2)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::new(rows, cols, (0..rows * cols).map(|_| cn(rng, 1.0)).collect()).unwrap()
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let v: Vec<Complex64> = (0..dim).map(|_| cn(rng, 1.0)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CVector::new(v.into_iter().map(|z| z / n).collect())
}

/// `||A x||²` by explicit loops.
pub fn gain(a: &CMatrix, x: &CVector) -> f64 {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| a[(i, j)] * x[j])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

/// Naive unnormalized DFT.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

/// Naive inverse DFT (1/N scaling).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|t| {
            x.iter()
                .enumerate()
                .map(|(k, &v)| v * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Kolmogorov-Smirnov statistic of `samples` against U(0, 1).
pub fn ks_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| f64::max((i as f64 + 1.0) / n - x, x - i as f64 / n))
        .fold(0.0, f64::max)
}

pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean of the minimum of `k` i.i.d. uniforms, estimated by brute force.
pub fn brute_force_min_uniform_mean<R: Rng>(rng: &mut R, k: usize, trials: usize) -> f64 {
    (0..trials)
        .map(|_| (0..k).map(|_| rng.random::<f64>()).fold(1.0, f64::min))
        .sum::<f64>()
        / trials as f64
}
