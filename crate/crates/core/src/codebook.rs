//! Random vector quantization (RVQ) codebooks and the two selection rules:
//! minimum-angle quantization of a channel direction, and rate-maximizing
//! selection of a transmit beamformer for a full MIMO channel.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::channel::complex_gaussian;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::rng::seeded;

/// Largest supported codebook size in bits.
pub const MAX_BITS: u32 = 20;

/// Relative margin a later entry must beat the incumbent by to take over, so
/// entries that differ only by rounding (e.g. a global phase) tie to the
/// lowest index.
const TIE_RTOL: f64 = 1e-12;

const HEADER_LEN: usize = 12;

/// `2^bits` unit-norm vectors of dimension `dim`, shared by both link ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    dim: usize,
    bits: u32,
    seed: u32,
    /// Row-major, `dim` entries per vector.
    entries: Vec<Complex64>,
}

impl Codebook {
    /// Wraps explicit vectors. Each is normalized; the count must be a power of two.
    pub fn from_vectors(vectors: Vec<CVector>, seed: u32) -> Result<Self> {
        let n = vectors.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::ShapeMismatch(format!(
                "codebook size {n} is not a power of two"
            )));
        }
        let dim = vectors[0].dim();
        if dim == 0 || vectors.iter().any(|v| v.dim() != dim) {
            return Err(Error::ShapeMismatch(
                "codebook vectors have unequal dimensions".into(),
            ));
        }
        let mut entries = Vec::with_capacity(n * dim);
        for v in vectors {
            entries.extend_from_slice(v.normalized().ok_or(Error::ZeroChannel)?.entries());
        }
        Ok(Codebook {
            dim,
            bits: n.trailing_zeros(),
            seed,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of vector `index`.
    pub fn entry(&self, index: usize) -> &[Complex64] {
        &self.entries[index * self.dim..(index + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> + '_ {
        self.entries.chunks_exact(self.dim)
    }

    /// Vector `index` as an owned [`CVector`].
    pub fn get(&self, index: usize) -> CVector {
        CVector::new(self.entry(index).to_vec())
    }

    pub fn vectors(&self) -> Vec<CVector> {
        self.iter().map(|w| CVector::new(w.to_vec())).collect()
    }

    /// The first `2^bits` entries. RVQ codebooks drawn from one seed are
    /// nested this way: `gen_rvq(d, b, s)` equals `gen_rvq(d, B, s).prefix(b)`.
    pub fn prefix(&self, bits: u32) -> Codebook {
        assert!(bits <= self.bits);
        Codebook {
            dim: self.dim,
            bits,
            seed: self.seed,
            entries: self.entries[..(1 << bits) * self.dim].to_vec(),
        }
    }

    /// Serializes as a 12-byte header (`dim`, `bits`, `seed`, little-endian
    /// u32) followed by the vectors, row-major, as interleaved little-endian
    /// f64 real/imaginary pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = u32::try_from(self.dim)
            .map_err(|_| Error::CodebookFormat("dimension does not fit in u32".into()))?;
        w.write_all(&dim.to_le_bytes())?;
        w.write_all(&self.bits.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for z in &self.entries {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`Codebook::write_to`]. Rejects truncated or trailing data
    /// and vectors that are not unit norm.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < HEADER_LEN {
            return Err(Error::CodebookFormat(format!(
                "{} bytes is shorter than the header",
                bytes.len()
            )));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
        let (dim, bits, seed) = (word(0) as usize, word(1), word(2));
        if dim == 0 {
            return Err(Error::CodebookFormat("dimension is zero".into()));
        }
        if bits > MAX_BITS {
            return Err(Error::CodebookTooLarge(bits));
        }
        let count = 1usize << bits;
        let expected = HEADER_LEN + count * dim * 16;
        if bytes.len() != expected {
            return Err(Error::CodebookFormat(format!(
                "expected {expected} bytes for dim {dim}, {bits} bits; found {}",
                bytes.len()
            )));
        }
        let float = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
        let entries: Vec<Complex64> = bytes[HEADER_LEN..]
            .chunks_exact(16)
            .map(|c| Complex64::new(float(&c[..8]), float(&c[8..])))
            .collect();
        let cb = Codebook {
            dim,
            bits,
            seed,
            entries,
        };
        if let Some(i) = cb
            .iter()
            .position(|w| (norm_sqr(w).sqrt() - 1.0).abs() > 1e-9)
        {
            return Err(Error::CodebookFormat(format!(
                "vector {i} is not unit norm"
            )));
        }
        Ok(cb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Draws an RVQ codebook: `2^bits` independent vectors isotropic on the unit
/// sphere of `C^dim`, generated from `seed`.
pub fn gen_rvq(dim: usize, bits: u32, seed: u32) -> Result<Codebook> {
    if bits > MAX_BITS {
        return Err(Error::CodebookTooLarge(bits));
    }
    if dim == 0 {
        return Err(Error::ShapeMismatch(
            "codebook dimension must be positive".into(),
        ));
    }
    let mut rng = seeded(u64::from(seed));
    let count = 1usize << bits;
    let mut entries = Vec::with_capacity(count * dim);
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..count {
        let n = loop {
            for z in g.iter_mut() {
                *z = complex_gaussian(&mut rng, 1.0);
            }
            let n = norm_sqr(&g).sqrt();
            if n > 0.0 {
                break n;
            }
        };
        entries.extend(g.iter().map(|z| z / n));
    }
    Ok(Codebook {
        dim,
        bits,
        seed,
        entries,
    })
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Outcome of a codebook search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizationResult {
    pub index: usize,
    /// sin² of the angle between the channel direction and the chosen entry.
    /// For a matrix channel this generalizes to `1 - ||H w||² / ||H||_F²`.
    pub distortion: f64,
    /// Selection metric: `|h^H w|²` for directions, `||H w||²` for beamformers.
    pub metric: f64,
}

fn argmax(metrics: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NAN);
    for (i, m) in metrics.enumerate() {
        if i == 0 || m > best.1 + TIE_RTOL * best.1.abs() {
            best = (i, m);
        }
    }
    best
}

/// Minimum-angle quantization of a channel direction.
pub fn quantize_direction(h: &CVector, cb: &Codebook) -> Result<QuantizationResult> {
    if h.dim() != cb.dim {
        return Err(Error::ShapeMismatch(format!(
            "channel of length {} against codebook of dimension {}",
            h.dim(),
            cb.dim
        )));
    }
    let energy = h.norm_sqr();
    if energy == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let (index, metric) = argmax(cb.iter().map(|w| {
        h.entries()
            .iter()
            .zip(w)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }));
    Ok(QuantizationResult {
        index,
        distortion: (1.0 - metric / energy).clamp(0.0, 1.0),
        metric,
    })
}

/// Instantaneous rate `log2(1 + rho * gain)` of a beamformed link.
pub fn instantaneous_rate(rho: f64, gain: f64) -> f64 {
    (rho * gain).ln_1p() / std::f64::consts::LN_2
}

/// Picks the entry maximizing `log(1 + rho ||H w||²)`.
///
/// The rate is strictly increasing in `||H w||²` for `rho > 0`, so the search
/// ranks entries by `||H w||²` directly and the choice does not depend on `rho`.
pub fn select_beamformer(h: &CMatrix, cb: &Codebook, rho: f64) -> Result<QuantizationResult> {
    if h.cols() != cb.dim {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} channel against codebook of dimension {}",
            h.rows(),
            h.cols(),
            cb.dim
        )));
    }
    debug_assert!(rho > 0.0);
    let cols = h.cols();
    let gain = |w: &[Complex64]| -> f64 {
        h.data()
            .chunks_exact(cols)
            .map(|row| {
                row.iter()
                    .zip(w)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    };
    let (index, metric) = argmax(cb.iter().map(gain));
    let energy = h.frobenius_norm_sqr();
    let distortion = if energy > 0.0 {
        (1.0 - metric / energy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(QuantizationResult {
        index,
        distortion,
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sizes_and_unit_norm() {
        let cb = gen_rvq(2, 0, 1).unwrap();
        assert_eq!(cb.len(), 1);
        let cb = gen_rvq(2, 3, 1).unwrap();
        assert_eq!(cb.len(), 8);
        assert!(cb.vectors().iter().all(|v| (v.norm() - 1.0).abs() <= 1e-12));
        assert_eq!(cb.get(3), cb.vectors()[3]);
    }

    #[test]
    fn too_many_bits() {
        assert!(matches!(
            gen_rvq(2, 21, 0),
            Err(Error::CodebookTooLarge(21))
        ));
    }

    #[test]
    fn regeneration_is_identical_and_nested() {
        let big = gen_rvq(3, 5, 42).unwrap();
        assert_eq!(big, gen_rvq(3, 5, 42).unwrap());
        assert_eq!(big.prefix(2), gen_rvq(3, 2, 42).unwrap());
    }

    #[test]
    fn exact_entry_is_found_with_zero_distortion() {
        let mut vectors = gen_rvq(2, 3, 7).unwrap().vectors();
        let h = CVector::new(vec![c(0.3, -1.2), c(2.0, 0.5)]);
        vectors[5] = h.normalized().unwrap();
        let cb = Codebook::from_vectors(vectors, 0).unwrap();
        let q = quantize_direction(&h, &cb).unwrap();
        assert_eq!(q.index, 5);
        assert!(q.distortion < 1e-12);
    }

    #[test]
    fn phase_duplicates_tie_to_lowest_index() {
        let w = CVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rotated = w.scale(Complex64::from_polar(1.0, 1.234));
        let other = CVector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let cb = Codebook::from_vectors(vec![other, w.clone(), rotated, CVector::basis(2, 1)], 0)
            .unwrap();
        let h = w.scale_real(3.0);
        assert_eq!(quantize_direction(&h, &cb).unwrap().index, 1);
    }

    #[test]
    fn zero_channel_and_shape_errors() {
        let cb = gen_rvq(2, 2, 0).unwrap();
        assert!(matches!(
            quantize_direction(&CVector::zeros(2), &cb),
            Err(Error::ZeroChannel)
        ));
        assert!(matches!(
            quantize_direction(&CVector::basis(3, 0), &cb),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            select_beamformer(&CMatrix::identity(3), &cb, 1.0),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn beamformer_selection_on_diagonal_channel() {
        let cb =
            Codebook::from_vectors(vec![CVector::basis(2, 0), CVector::basis(2, 1)], 0).unwrap();
        let h = CMatrix::diag(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let q = select_beamformer(&h, &cb, 1.0).unwrap();
        assert_eq!(q.index, 0);
        assert!((q.metric - 4.0).abs() < 1e-12);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let cb = gen_rvq(4, 6, 0xDEAD_BEEF).unwrap();
        let mut buf = Vec::new();
        cb.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 12 + 64 * 4 * 16);
        assert_eq!(
            &buf[..12],
            &[4, 0, 0, 0, 6, 0, 0, 0, 0xEF, 0xBE, 0xAD, 0xDE]
        );
        let back = Codebook::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, cb);
    }

    #[test]
    fn binary_import_rejects_bad_files() {
        let cb = gen_rvq(2, 1, 3).unwrap();
        let mut buf = Vec::new();
        cb.write_to(&mut buf).unwrap();

        assert!(matches!(
            Codebook::read_from(&buf[..8]),
            Err(Error::CodebookFormat(_))
        ));
        assert!(matches!(
            Codebook::read_from(&buf[..buf.len() - 1]),
            Err(Error::CodebookFormat(_))
        ));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(matches!(
            Codebook::read_from(extra.as_slice()),
            Err(Error::CodebookFormat(_))
        ));

        let mut big = buf.clone();
        big[4] = 30;
        assert!(matches!(
            Codebook::read_from(big.as_slice()),
            Err(Error::CodebookTooLarge(30))
        ));

        let mut scaled = buf.clone();
        scaled[12..20].copy_from_slice(&5.0f64.to_le_bytes());
        assert!(matches!(
            Codebook::read_from(scaled.as_slice()),
            Err(Error::CodebookFormat(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cb.bin");
        let cb = gen_rvq(2, 4, 99).unwrap();
        cb.save(&path).unwrap();
        assert_eq!(Codebook::load(&path).unwrap(), cb);
    }
}
