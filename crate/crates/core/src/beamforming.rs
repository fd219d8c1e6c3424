//! Transmit/receive beamforming on a single subcarrier, and zero-forcing
//! precoding for the multi-user broadcast case.

use num_complex::Complex64;

use crate::codebook::{quantize_direction, Codebook};
use crate::error::{Error, Result};
use crate::numerics::{
    dominant_eigvec_by_squaring, dominant_right_eigvec, mat_inverse, CMatrix, CVector,
    EIG_MAX_ITER, EIG_TOL,
};

/// Transmit beam, receive combiner and the resulting power gain.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformPair {
    pub transmit: CVector,
    pub receive: CVector,
    /// `|a^H H b|² / ||b||²`
    pub gain: f64,
}

/// Unquantized optimum: the dominant right singular vector of `H` and its
/// squared singular value.
///
/// Falls back to Gram-matrix squaring when power iteration stalls on a
/// near-degenerate spectrum.
pub fn optimal_beamformer(h: &CMatrix) -> Result<(CVector, f64)> {
    match dominant_right_eigvec(h, EIG_TOL, EIG_MAX_ITER) {
        Err(Error::NoConvergence { .. }) => {
            let v = dominant_eigvec_by_squaring(&h.gram())?;
            let lambda = h.mul_vec(&v)?.norm_sqr();
            Ok((v, lambda))
        }
        other => other,
    }
}

/// Maximum ratio combiner `a = H b / ||H b||`.
pub fn mrc_receive(h: &CMatrix, b: &CVector) -> Result<CVector> {
    h.mul_vec(b)?
        .normalized()
        .ok_or(Error::NullEffectiveChannel)
}

/// Joint transmit beam `b` and matched receive combiner.
pub fn beamform_pair(h: &CMatrix, b: &CVector) -> Result<BeamformPair> {
    let a = mrc_receive(h, b)?;
    let g = effective_scalar_channel(h, b, &a)?;
    Ok(BeamformPair {
        gain: g.norm_sqr() / b.norm_sqr(),
        transmit: b.clone(),
        receive: a,
    })
}

/// Scalar channel `a^H H b` seen by the symbol after combining.
pub fn effective_scalar_channel(h: &CMatrix, b: &CVector, a: &CVector) -> Result<Complex64> {
    if a.dim() != h.rows() {
        return Err(Error::ShapeMismatch(format!(
            "combiner of length {} for {} receive antennas",
            a.dim(),
            h.rows()
        )));
    }
    Ok(a.inner(&h.mul_vec(b)?))
}

/// Uniform power allocation over subcarriers: every beam is rescaled to
/// `||b_k||² = p_total / N`.
pub fn apply_power_constraint(beams: &[CVector], p_total: f64) -> Result<Vec<CVector>> {
    let per_beam = (p_total / beams.len() as f64).sqrt();
    beams
        .iter()
        .map(|b| {
            let n = b.norm();
            if n > 0.0 && n.is_finite() {
                Ok(b.scale_real(per_beam / n))
            } else {
                Err(Error::ShapeMismatch(
                    "cannot scale a zero beamformer".into(),
                ))
            }
        })
        .collect()
}

/// Zero-forcing beams for `M` users.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecoderSet {
    pub vectors: Vec<CVector>,
    pub source_directions: Vec<CVector>,
}

impl PrecoderSet {
    pub fn n_users(&self) -> usize {
        self.vectors.len()
    }

    /// Largest `|d_i^H v_j|` over `i != j`.
    pub fn max_leakage(&self) -> f64 {
        let m = self.n_users();
        let mut worst = 0.0f64;
        for (i, d) in self.source_directions.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate().take(m) {
                if i != j {
                    worst = worst.max(d.inner(v).norm());
                }
            }
        }
        worst
    }
}

/// Zero-forcing beamformers from `M` quantized directions of dimension `M`.
///
/// The directions are stacked as rows `d_i^H` of a square matrix; the beams
/// are its inverse's normalized columns, so `d_i^H v_j = 0` for `i != j`.
pub fn zfbf_precoders(directions: &[CVector]) -> Result<PrecoderSet> {
    let m = directions.len();
    if m == 0 || directions.iter().any(|d| d.dim() != m) {
        return Err(Error::ShapeMismatch(format!(
            "zero-forcing needs {m} directions of length {m}"
        )));
    }
    let rows: Vec<CVector> = directions
        .iter()
        .map(|d| CVector::new(d.entries().iter().map(|z| z.conj()).collect()))
        .collect();
    let inv = mat_inverse(&CMatrix::from_rows(&rows)?)?;
    let vectors = (0..m)
        .map(|j| {
            inv.column(j)
                .normalized()
                .ok_or_else(|| Error::SingularMatrix("zero column in inverse".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecoderSet {
        vectors,
        source_directions: directions.to_vec(),
    })
}

/// Each user quantizes its own channel with its own codebook; the
/// transmitter zero-forces on the reported entries.
pub fn quantized_zfbf(channels: &[CVector], codebooks: &[Codebook]) -> Result<PrecoderSet> {
    if channels.len() != codebooks.len() {
        return Err(Error::ShapeMismatch(
            "one codebook per user is required".into(),
        ));
    }
    let directions = channels
        .iter()
        .zip(codebooks)
        .map(|(h, cb)| Ok(cb.get(quantize_direction(h, cb)?.index).clone()))
        .collect::<Result<Vec<_>>>()?;
    zfbf_precoders(&directions)
}

/// SINR of `user` with equal power `P/M` per stream and unit noise power:
/// `(P/M)|h^H v_u|² / (1 + sum_{j != u} (P/M)|h^H v_j|²)`.
pub fn zfbf_sinr(h: &CVector, precoders: &PrecoderSet, user: usize, p_total: f64) -> f64 {
    let (signal, interference) = zfbf_signal_interference(h, precoders, user, p_total);
    signal / (1.0 + interference)
}

/// Numerator and interference sum of [`zfbf_sinr`].
pub fn zfbf_signal_interference(
    h: &CVector,
    precoders: &PrecoderSet,
    user: usize,
    p_total: f64,
) -> (f64, f64) {
    let per_stream = p_total / precoders.n_users() as f64;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, v) in precoders.vectors.iter().enumerate() {
        let p = per_stream * h.inner(v).norm_sqr();
        if j == user {
            signal = p;
        } else {
            interference += p;
        }
    }
    (signal, interference)
}
