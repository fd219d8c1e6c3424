//! BPSK and Gray-mapped QPSK with unit average symbol energy.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::complex_gaussian;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            other => Err(Error::Config(format!("unknown modulation `{other}`"))),
        }
    }
}

#[inline]
fn antipodal(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Maps bits (0/1) to symbols. BPSK: 0 -> +1, 1 -> -1. QPSK: the first bit
/// of each pair picks the in-phase sign, the second the quadrature sign.
pub fn modulate(bits: &[u8], scheme: Modulation) -> Result<Vec<Complex64>> {
    match scheme {
        Modulation::Bpsk => Ok(bits
            .iter()
            .map(|&b| Complex64::new(antipodal(b), 0.0))
            .collect()),
        Modulation::Qpsk => {
            if !bits.len().is_multiple_of(2) {
                return Err(Error::OddBitCount(bits.len()));
            }
            Ok(bits
                .chunks_exact(2)
                .map(|p| Complex64::new(antipodal(p[0]), antipodal(p[1])) * FRAC_1_SQRT_2)
                .collect())
        }
    }
}

/// Sign decisions; the inverse of [`modulate`] on noiseless input.
pub fn demodulate(symbols: &[Complex64], scheme: Modulation) -> Vec<u8> {
    let decide = |x: f64| u8::from(x < 0.0);
    match scheme {
        Modulation::Bpsk => symbols.iter().map(|z| decide(z.re)).collect(),
        Modulation::Qpsk => symbols
            .iter()
            .flat_map(|z| [decide(z.re), decide(z.im)])
            .collect(),
    }
}

/// Adds i.i.d. CN(0, noise_var) noise.
pub fn awgn<R: Rng + ?Sized>(symbols: &[Complex64], noise_var: f64, rng: &mut R) -> Vec<Complex64> {
    if noise_var == 0.0 {
        return symbols.to_vec();
    }
    symbols
        .iter()
        .map(|&s| s + complex_gaussian(rng, noise_var))
        .collect()
}
