//! Rayleigh MIMO channel generation, the tap-to-subcarrier transform and
//! least-squares channel estimation from orthogonal training.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{hermitian, CMatrix};

/// One circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `rows x cols` matrix of i.i.d. CN(0, variance) entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for z in m.data_mut() {
        *z = complex_gaussian(rng, variance);
    }
    m
}

/// Flat Rayleigh channel: `n_r x n_t` matrix of i.i.d. CN(0, 1) gains.
pub fn gen_rayleigh_flat<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> CMatrix {
    gaussian_matrix(n_r, n_t, 1.0, rng)
}

/// Time-domain MIMO impulse response: `L` taps of equal shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<CMatrix>,
}

impl ChannelTaps {
    pub fn new(taps: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = taps.first() else {
            return Err(Error::ShapeMismatch(
                "a channel needs at least one tap".into(),
            ));
        };
        let shape = first.shape();
        if taps.iter().any(|t| t.shape() != shape) {
            return Err(Error::ShapeMismatch("taps have unequal shapes".into()));
        }
        Ok(ChannelTaps { taps })
    }

    pub fn taps(&self) -> &[CMatrix] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `(n_r, n_t)`
    pub fn shape(&self) -> (usize, usize) {
        self.taps[0].shape()
    }
}

/// `L` i.i.d. taps with a uniform power-delay profile, entries CN(0, 1/L).
pub fn gen_selective_taps<R: Rng + ?Sized>(
    n_r: usize,
    n_t: usize,
    n_taps: usize,
    rng: &mut R,
) -> ChannelTaps {
    assert!(n_taps >= 1, "at least one tap is required");
    let var = 1.0 / n_taps as f64;
    ChannelTaps {
        taps: (0..n_taps)
            .map(|_| gaussian_matrix(n_r, n_t, var, rng))
            .collect(),
    }
}

/// Per-subcarrier channel matrices of one OFDM block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub per_subcarrier: Vec<CMatrix>,
    pub source_taps: ChannelTaps,
}

impl ChannelRealization {
    pub fn n_subcarriers(&self) -> usize {
        self.per_subcarrier.len()
    }
}

/// Precomputed `exp(-j 2 pi m / N)` table for an `N`-subcarrier grid.
#[derive(Clone, Debug)]
pub struct SubcarrierMap {
    twiddles: Vec<Complex64>,
}

impl SubcarrierMap {
    pub fn new(n_subcarriers: usize) -> Self {
        assert!(n_subcarriers >= 1);
        let n = n_subcarriers as f64;
        SubcarrierMap {
            twiddles: (0..n_subcarriers)
                .map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 / n))
                .collect(),
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.twiddles.len()
    }

    /// `H_k = sum_l taps[l] exp(-j 2 pi k l / N)` for `k = 0..N`.
    pub fn apply(&self, taps: &ChannelTaps) -> Result<ChannelRealization> {
        let n = self.n_subcarriers();
        if taps.len() > n {
            return Err(Error::ShapeMismatch(format!(
                "{} taps do not fit in {n} subcarriers",
                taps.len()
            )));
        }
        let (rows, cols) = taps.shape();
        let per_subcarrier = (0..n)
            .map(|k| {
                let mut h = CMatrix::zeros(rows, cols);
                for (l, tap) in taps.taps.iter().enumerate() {
                    let w = self.twiddles[(k * l) % n];
                    for (acc, &g) in h.data_mut().iter_mut().zip(tap.data()) {
                        *acc += g * w;
                    }
                }
                h
            })
            .collect();
        Ok(ChannelRealization {
            per_subcarrier,
            source_taps: taps.clone(),
        })
    }
}

/// Frequency response of `taps` on an `n_subcarriers` grid.
pub fn to_subcarriers(taps: &ChannelTaps, n_subcarriers: usize) -> Result<ChannelRealization> {
    SubcarrierMap::new(n_subcarriers).apply(taps)
}

/// Orthogonal unit-modulus training block, `n_t x n_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSequence {
    symbols: CMatrix,
}

impl TrainingSequence {
    pub fn symbols(&self) -> &CMatrix {
        &self.symbols
    }

    pub fn n_pilots(&self) -> usize {
        self.symbols.cols()
    }

    pub fn n_t(&self) -> usize {
        self.symbols.rows()
    }

    /// Same sequence multiplied by a common unit-modulus phase.
    pub fn rotated(&self, phase: f64) -> TrainingSequence {
        TrainingSequence {
            symbols: self.symbols.scale(Complex64::from_polar(1.0, phase)),
        }
    }
}

/// Phase-shift training: entry `(r, c)` is `exp(j 2 pi r c / n_p)`.
///
/// The rows are distinct DFT rows, so `S S^H = n_p I`.
pub fn make_phase_shift_training(n_t: usize, n_p: usize) -> Result<TrainingSequence> {
    if n_p < n_t || n_t == 0 {
        return Err(Error::InvalidLength { n_t, n_pilots: n_p });
    }
    let mut s = CMatrix::zeros(n_t, n_p);
    for r in 0..n_t {
        for c in 0..n_p {
            s[(r, c)] = Complex64::from_polar(1.0, 2.0 * PI * ((r * c) % n_p) as f64 / n_p as f64);
        }
    }
    Ok(TrainingSequence { symbols: s })
}

/// Received training block `H S + N` with CN(0, noise_var) noise.
pub fn transmit_training<R: Rng + ?Sized>(
    h: &CMatrix,
    training: &TrainingSequence,
    noise_var: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let mut y = h.matmul(&training.symbols)?;
    if noise_var > 0.0 {
        for z in y.data_mut() {
            *z += complex_gaussian(rng, noise_var);
        }
    }
    Ok(y)
}

/// Least-squares estimate `Y S^H / n_p`.
pub fn ls_estimate(received: &CMatrix, training: &TrainingSequence) -> Result<CMatrix> {
    if received.cols() != training.n_pilots() {
        return Err(Error::ShapeMismatch(format!(
            "received block has {} columns but training has {} pilots",
            received.cols(),
            training.n_pilots()
        )));
    }
    let np = training.n_pilots() as f64;
    Ok(received
        .matmul(&hermitian(&training.symbols))?
        .scale(Complex64::new(1.0 / np, 0.0)))
}
