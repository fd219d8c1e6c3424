use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::modulation::Modulation;
use crate::codebook::MAX_BITS;
use crate::error::{Error, Result};

/// Amount of channel information fed back to the transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Feedback {
    /// Unquantized optimal beamformer.
    Perfect,
    /// Index into a `2^B` RVQ codebook.
    Bits(u32),
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Perfect => f.write_str("perfect"),
            Feedback::Bits(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Feedback {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("perfect") {
            return Ok(Feedback::Perfect);
        }
        let bits: u32 = s.parse().map_err(|_| {
            Error::Config(format!(
                "feedback_bits: expected an integer or `perfect`, got `{s}`"
            ))
        })?;
        if bits > MAX_BITS {
            return Err(Error::Config(format!(
                "feedback_bits: {bits} exceeds the {MAX_BITS}-bit limit"
            )));
        }
        Ok(Feedback::Bits(bits))
    }
}

impl Serialize for Feedback {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Feedback::Perfect => s.serialize_str("perfect"),
            Feedback::Bits(b) => s.serialize_u32(*b),
        }
    }
}

impl<'de> Deserialize<'de> for Feedback {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct FeedbackVisitor;
        impl Visitor<'_> for FeedbackVisitor {
            type Value = Feedback;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a bit count or \"perfect\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Feedback, E> {
                u32::try_from(v)
                    .ok()
                    .filter(|&b| b <= MAX_BITS)
                    .map(Feedback::Bits)
                    .ok_or_else(|| E::custom(format!("{v} exceeds the {MAX_BITS}-bit limit")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Feedback, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("bit count cannot be negative"))
                    .and_then(|v| self.visit_u64(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Feedback, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(FeedbackVisitor)
    }
}

/// Where the receiver's channel knowledge comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiMode {
    /// The receiver knows every `H_k` exactly.
    PerfectAtRx,
    /// The receiver uses LS estimates from phase-shift training.
    Estimated,
}

/// Complete description of one simulated link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n_subcarriers: usize,
    pub n_taps: usize,
    pub feedback_bits: Feedback,
    pub modulation: Modulation,
    pub snr_db_points: Vec<f64>,
    pub target_errors: u64,
    pub max_bits: u64,
    pub csi_mode: CsiMode,
    /// Training length per subcarrier in estimated mode.
    pub n_pilots: usize,
    /// Training SNR; `None` tracks the data SNR of each sweep point.
    pub pilot_snr_db: Option<f64>,
    /// Reuse one codebook for every trial instead of drawing a fresh one.
    pub fixed_codebook: bool,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_t: 2,
            n_r: 1,
            n_subcarriers: 64,
            n_taps: 4,
            feedback_bits: Feedback::Bits(4),
            modulation: Modulation::Bpsk,
            snr_db_points: (0..=10).map(|k| f64::from(2 * k)).collect(),
            target_errors: 200,
            max_bits: 10_000_000,
            csi_mode: CsiMode::PerfectAtRx,
            n_pilots: 2,
            pilot_snr_db: None,
            fixed_codebook: false,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_t == 0 || self.n_r == 0 {
            return fail("n_t and n_r must be at least 1".into());
        }
        if self.n_taps == 0 {
            return fail("n_taps must be at least 1".into());
        }
        if self.n_subcarriers < self.n_taps {
            return fail(format!(
                "n_subcarriers ({}) must be at least n_taps ({})",
                self.n_subcarriers, self.n_taps
            ));
        }
        if let Feedback::Bits(b) = self.feedback_bits {
            if b > MAX_BITS {
                return fail(format!(
                    "feedback_bits: {b} exceeds the {MAX_BITS}-bit limit"
                ));
            }
        }
        if self.snr_db_points.is_empty() {
            return fail("snr_db_points must not be empty".into());
        }
        if self.snr_db_points.iter().any(|s| s.is_nan()) {
            return fail("snr_db_points contains NaN".into());
        }
        if self.snr_db_points.windows(2).any(|w| w[1] <= w[0]) {
            return fail("snr_db_points must be strictly increasing".into());
        }
        if self.target_errors == 0 {
            return fail("target_errors must be positive".into());
        }
        if self.max_bits == 0 {
            return fail("max_bits must be positive".into());
        }
        if self.csi_mode == CsiMode::Estimated && self.n_pilots < self.n_t {
            return fail(format!(
                "n_pilots ({}) must be at least n_t ({}) for orthogonal training",
                self.n_pilots, self.n_t
            ));
        }
        if self.pilot_snr_db.is_some_and(|s| !s.is_finite()) {
            return fail("pilot_snr_db must be finite".into());
        }
        Ok(())
    }

    pub fn bits_per_trial(&self) -> u64 {
        (self.n_subcarriers * self.modulation.bits_per_symbol()) as u64
    }
}
