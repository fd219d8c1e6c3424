//! Monte Carlo BER engine for the limited-feedback beamforming link.
//!
//! One trial is one OFDM block: a fresh frequency-selective channel, one
//! beamformed symbol per subcarrier, maximum-ratio combining at the receiver.
//! Every random draw of a trial comes from streams keyed by
//! `(master_seed, trial_index)`, and trials are aggregated in fixed-size
//! batches, so a sweep gives identical counts for any worker count.
//!
//! SNR convention: `snr_db = 10 log10(P_sub / sigma²)` where `P_sub = P_t / N`
//! is the transmit power of one subcarrier (the simulator uses `P_t = N`, i.e.
//! unit power per subcarrier) and `sigma²` the noise variance per receive
//! antenna and subcarrier. For a single-antenna link this is the average
//! per-branch SNR.

mod config;
mod modulation;

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::beamforming::{
    apply_power_constraint, effective_scalar_channel, mrc_receive, optimal_beamformer,
};
use crate::channel::{
    complex_gaussian, gen_selective_taps, ls_estimate, make_phase_shift_training,
    transmit_training, SubcarrierMap, TrainingSequence,
};
use crate::codebook::{gen_rvq, select_beamformer, Codebook};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::rng::{stream, Purpose};

pub use config::{CsiMode, Feedback, SimConfig};
pub use modulation::{awgn, demodulate, modulate, Modulation};

/// Trials evaluated between two checks of the stopping rule.
pub const BATCH_TRIALS: u64 = 128;

/// Stream index reserved for the shared codebook in fixed-codebook mode.
const FIXED_CODEBOOK_INDEX: u64 = u64::MAX;

/// Linear SNR from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Counts from one or more trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bits: u64,
    pub errors: u64,
    /// Subcarriers dropped because the beam fell in the channel's null space.
    pub skipped: u64,
}

impl std::ops::Add for TrialOutcome {
    type Output = TrialOutcome;
    fn add(self, o: TrialOutcome) -> TrialOutcome {
        TrialOutcome {
            bits: self.bits + o.bits,
            errors: self.errors + o.errors,
            skipped: self.skipped + o.skipped,
        }
    }
}

/// Result of combining one received subcarrier.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinedLink {
    /// Receive combiner, computed from the receiver's channel knowledge.
    pub combiner: CVector,
    /// `a^H H b` with the true channel.
    pub gain: Complex64,
}

/// Receive side of one subcarrier: MRC from the receiver's estimate `h_rx`,
/// applied to the true channel `h_true`.
pub fn combine_subcarrier(
    h_true: &CMatrix,
    h_rx: &CMatrix,
    beam: &CVector,
) -> Result<CombinedLink> {
    let combiner = mrc_receive(h_rx, beam)?;
    let gain = effective_scalar_channel(h_true, beam, &combiner)?;
    Ok(CombinedLink { combiner, gain })
}

/// Precomputed state shared by all trials of one configuration.
#[derive(Debug)]
pub struct Simulator {
    config: SimConfig,
    grid: SubcarrierMap,
    training: Option<TrainingSequence>,
    fixed_codebook: Option<Codebook>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let training = match config.csi_mode {
            CsiMode::PerfectAtRx => None,
            CsiMode::Estimated => Some(make_phase_shift_training(config.n_t, config.n_pilots)?),
        };
        let fixed_codebook = match (config.fixed_codebook, config.feedback_bits) {
            (true, Feedback::Bits(b)) => Some(gen_rvq(
                config.n_t,
                b,
                stream(config.master_seed, Purpose::Codebook, FIXED_CODEBOOK_INDEX).next_u32(),
            )?),
            _ => None,
        };
        Ok(Simulator {
            grid: SubcarrierMap::new(config.n_subcarriers),
            config,
            training,
            fixed_codebook,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Codebook used by `trial_index`, or `None` with perfect feedback.
    pub fn codebook_for(&self, trial_index: u64) -> Result<Option<Codebook>> {
        match self.config.feedback_bits {
            Feedback::Perfect => Ok(None),
            Feedback::Bits(b) => match &self.fixed_codebook {
                Some(cb) => Ok(Some(cb.clone())),
                None => {
                    let seed =
                        stream(self.config.master_seed, Purpose::Codebook, trial_index).next_u32();
                    Ok(Some(gen_rvq(self.config.n_t, b, seed)?))
                }
            },
        }
    }

    /// Simulates one OFDM block at `snr_db` (`+inf` means noiseless).
    pub fn run_trial(&self, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let seed = cfg.master_seed;
        let rho = db_to_linear(snr_db);
        let noise_var = 1.0 / rho;

        let mut channel_rng = stream(seed, Purpose::Channel, trial_index);
        let taps = gen_selective_taps(cfg.n_r, cfg.n_t, cfg.n_taps, &mut channel_rng);
        let channel = self.grid.apply(&taps)?.per_subcarrier;

        let estimated: Option<Vec<CMatrix>> = match &self.training {
            None => None,
            Some(training) => {
                let pilot_var = 1.0 / db_to_linear(cfg.pilot_snr_db.unwrap_or(snr_db));
                let mut rng = stream(seed, Purpose::TrainingNoise, trial_index);
                Some(
                    channel
                        .iter()
                        .map(|h| {
                            ls_estimate(
                                &transmit_training(h, training, pilot_var, &mut rng)?,
                                training,
                            )
                        })
                        .collect::<Result<_>>()?,
                )
            }
        };
        let receiver_csi: &[CMatrix] = estimated.as_deref().unwrap_or(&channel);

        let beams: Vec<CVector> = match self.codebook_for(trial_index)? {
            None => receiver_csi
                .iter()
                .map(|h| optimal_beamformer(h).map(|(v, _)| v))
                .collect::<Result<_>>()?,
            Some(cb) => receiver_csi
                .iter()
                .map(|h| Ok(cb.get(select_beamformer(h, &cb, rho)?.index)))
                .collect::<Result<_>>()?,
        };
        let p_total = cfg.n_subcarriers as f64;
        let beams = apply_power_constraint(&beams, p_total)?;

        let mut data_rng = stream(seed, Purpose::Data, trial_index);
        let bits: Vec<u8> = (0..cfg.bits_per_trial())
            .map(|_| data_rng.random_range(0..2u8))
            .collect();
        let symbols = modulate(&bits, cfg.modulation)?;

        let mut noise_rng = stream(seed, Purpose::Noise, trial_index);
        let mut received = Vec::with_capacity(symbols.len());
        let mut delivered = vec![true; symbols.len()];
        let mut skipped = 0;
        let mut noise = Vec::with_capacity(cfg.n_r);
        for (k, &x) in symbols.iter().enumerate() {
            // noise is drawn before the skip check so later subcarriers keep their samples
            noise.clear();
            noise.extend((0..cfg.n_r).map(|_| complex_gaussian(&mut noise_rng, noise_var)));
            match combine_subcarrier(&channel[k], &receiver_csi[k], &beams[k]) {
                Ok(link) => {
                    let combined_noise: Complex64 = link
                        .combiner
                        .entries()
                        .iter()
                        .zip(&noise)
                        .map(|(a, n)| a.conj() * n)
                        .sum();
                    received.push(link.gain * x + combined_noise);
                }
                Err(Error::NullEffectiveChannel) => {
                    skipped += 1;
                    delivered[k] = false;
                    received.push(Complex64::new(0.0, 0.0));
                }
                Err(e) => return Err(e),
            }
        }

        let bps = cfg.modulation.bits_per_symbol();
        let decided = demodulate(&received, cfg.modulation);
        let mut outcome = TrialOutcome {
            skipped,
            ..TrialOutcome::default()
        };
        for (k, ok) in delivered.iter().enumerate() {
            if *ok {
                let range = k * bps..(k + 1) * bps;
                outcome.bits += bps as u64;
                outcome.errors += decided[range.clone()]
                    .iter()
                    .zip(&bits[range])
                    .filter(|(a, b)| a != b)
                    .count() as u64;
            }
        }
        Ok(outcome)
    }

    /// Runs trials until `target_errors` or `max_bits` is reached at one SNR.
    pub fn run_point(&self, snr_db: f64) -> Result<BerPoint> {
        let cfg = &self.config;
        let per_trial = cfg.bits_per_trial();
        let max_trials = cfg.max_bits.div_ceil(per_trial);
        let mut total = TrialOutcome::default();
        let mut next = 0u64;
        while next < max_trials && total.errors < cfg.target_errors {
            let end = (next + BATCH_TRIALS).min(max_trials);
            let batch = (next..end)
                .into_par_iter()
                .map(|i| self.run_trial(snr_db, i))
                .try_reduce(TrialOutcome::default, |a, b| Ok(a + b))?;
            total = total + batch;
            next = end;
        }
        Ok(BerPoint::new(
            snr_db,
            total,
            total.errors >= cfg.target_errors,
        ))
    }

    /// Full SNR sweep on the current rayon pool.
    pub fn run_sweep(&self, label: &str) -> Result<BerCurve> {
        let points = self
            .config
            .snr_db_points
            .iter()
            .map(|&snr| self.run_point(snr))
            .collect::<Result<_>>()?;
        Ok(BerCurve {
            label: label.to_string(),
            config: self.config.clone(),
            points,
        })
    }
}

/// Runs [`Simulator::run_sweep`] on a dedicated pool of `threads` workers
/// (0 lets rayon choose).
pub fn run_sweep(config: &SimConfig, label: &str, threads: usize) -> Result<BerCurve> {
    let sim = Simulator::new(config.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| sim.run_sweep(label))
}

/// Aggregated counts at one SNR.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Normal-approximation 95% half-width of the binomial estimate.
    pub half_width_95: f64,
    /// False when the run stopped at `max_bits` before `target_errors`.
    pub converged: bool,
    pub skipped_subcarriers: u64,
}

impl BerPoint {
    pub fn new(snr_db: f64, outcome: TrialOutcome, converged: bool) -> Self {
        let (ber, half_width_95) = if outcome.bits == 0 {
            (0.0, 0.0)
        } else {
            let n = outcome.bits as f64;
            let p = outcome.errors as f64 / n;
            (p, 1.96 * (p * (1.0 - p) / n).sqrt())
        };
        BerPoint {
            snr_db,
            bits_sent: outcome.bits,
            bit_errors: outcome.errors,
            ber,
            half_width_95,
            converged,
            skipped_subcarriers: outcome.skipped,
        }
    }
}

/// BER against SNR for one feedback setting.
#[derive(Clone, Debug, PartialEq)]
pub struct BerCurve {
    pub label: String,
    pub config: SimConfig,
    pub points: Vec<BerPoint>,
}

/// CSV header of [`BerCurve::write_csv`].
pub const CSV_HEADER: &str = "snr_db,bits,errors,ber,ci95";

impl BerCurve {
    /// Writes `snr_db,bits,errors,ber,ci95` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{:.6e},{:.6e}",
                p.snr_db, p.bits_sent, p.bit_errors, p.ber, p.half_width_95
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn bers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber).collect()
    }

    /// SNR at which the curve crosses `target_ber`, interpolating linearly in
    /// `(snr_db, log10 ber)` between the first bracketing pair of points with
    /// nonzero BER.
    pub fn snr_at_ber(&self, target_ber: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.ber > 0.0)
            .map(|p| (p.snr_db, p.ber.log10()))
            .collect();
        let t = target_ber.log10();
        pts.windows(2).find_map(|w| {
            let ((s0, b0), (s1, b1)) = (w[0], w[1]);
            if b0 >= t && b1 <= t {
                if b0 == b1 {
                    Some(s0)
                } else {
                    Some(s0 + (t - b0) * (s1 - s0) / (b1 - b0))
                }
            } else {
                None
            }
        })
    }
}
