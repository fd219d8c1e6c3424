//! Command-line front end: config resolution, experiment presets, output
//! files and the summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{run_sweep, BerCurve, CsiMode, Feedback, Modulation, SimConfig};

/// BER level at which curves are compared.
pub const GAP_BER: f64 = 1e-3;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Canned antenna/CSI setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 2x1 MISO, receiver knows the channel.
    #[value(name = "fig2-miso")]
    Fig2Miso,
    /// 2x2 MIMO with QPSK, receiver knows the channel.
    #[value(name = "fig3-mimo22")]
    Fig3Mimo22,
    /// 2x1 MISO, receiver estimates the channel from phase-shift training.
    #[value(name = "fig4-estimated")]
    Fig4Estimated,
}

impl Preset {
    pub fn apply(self, cfg: &mut SimConfig) {
        cfg.n_t = 2;
        match self {
            Preset::Fig2Miso => {
                cfg.n_r = 1;
                cfg.csi_mode = CsiMode::PerfectAtRx;
            }
            Preset::Fig3Mimo22 => {
                cfg.n_r = 2;
                cfg.csi_mode = CsiMode::PerfectAtRx;
                cfg.modulation = Modulation::Qpsk;
            }
            Preset::Fig4Estimated => {
                cfg.n_r = 1;
                cfg.csi_mode = CsiMode::Estimated;
            }
        }
    }
}

/// One curve of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub label: String,
    pub feedback_bits: Feedback,
}

impl CurveSpec {
    pub fn new(feedback: Feedback) -> Self {
        let label = match feedback {
            Feedback::Perfect => "perfect".to_string(),
            Feedback::Bits(b) => format!("rvq-b{b}"),
        };
        CurveSpec {
            label,
            feedback_bits: feedback,
        }
    }
}

/// A resolved configuration plus the curves to run against it.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub config: SimConfig,
    pub curves: Vec<CurveSpec>,
}

/// Config file contents: every key optional, names as in [`SimConfig`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n_t: Option<usize>,
    n_r: Option<usize>,
    n_subcarriers: Option<usize>,
    n_taps: Option<usize>,
    feedback_bits: Option<Feedback>,
    modulation: Option<Modulation>,
    snr_db_points: Option<Vec<f64>>,
    target_errors: Option<u64>,
    max_bits: Option<u64>,
    csi_mode: Option<CsiMode>,
    n_pilots: Option<usize>,
    pilot_snr_db: Option<f64>,
    fixed_codebook: Option<bool>,
    master_seed: Option<u64>,
    curves: Option<Vec<CurveSpec>>,
}

impl ConfigFile {
    fn apply(self, cfg: &mut SimConfig) -> Option<Vec<CurveSpec>> {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        set!(
            n_t,
            n_r,
            n_subcarriers,
            n_taps,
            feedback_bits,
            modulation,
            snr_db_points,
            target_errors,
            max_bits,
            csi_mode,
            n_pilots,
            fixed_codebook,
            master_seed
        );
        if self.pilot_snr_db.is_some() {
            cfg.pilot_snr_db = self.pilot_snr_db;
        }
        self.curves
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lfmimo",
    version,
    about = "Limited-feedback MIMO-OFDM beamforming BER simulator"
)]
pub struct Args {
    /// Antenna/CSI preset, applied before the config file.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// JSON config file (flat keys named after the config fields); a
    /// manifest.json from an earlier run is accepted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for `<label>.csv` files and manifest.json.
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    /// Codebook size in bits, or `perfect`.
    #[arg(long)]
    pub feedback_bits: Option<String>,
    /// Curves to run, e.g. `perfect,1,4,8`.
    #[arg(long)]
    pub curves: Option<String>,
    /// Comma-separated, strictly increasing SNR points in dB.
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub modulation: Option<String>,
    /// Training length; switches the receiver to estimated CSI.
    #[arg(long)]
    pub pilots: Option<usize>,
    #[arg(long)]
    pub target_errors: Option<u64>,
    #[arg(long)]
    pub max_bits: Option<u64>,
}

fn parse_list<T>(raw: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| {
            parse(s.trim())
                .ok_or_else(|| Error::Config(format!("{what}: cannot parse `{}`", s.trim())))
        })
        .collect()
}

/// Resolves defaults, preset, config file and flags (in that order of
/// increasing precedence) into a validated experiment.
pub fn parse_config(args: &Args) -> Result<Experiment> {
    let mut cfg = SimConfig::default();
    if let Some(preset) = args.preset {
        preset.apply(&mut cfg);
    }
    let mut curves = None;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        curves = file.apply(&mut cfg);
    }
    if let Some(raw) = &args.feedback_bits {
        cfg.feedback_bits = raw.parse()?;
    }
    if let Some(raw) = &args.snr {
        cfg.snr_db_points = parse_list(raw, "--snr", |s| s.parse().ok())?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(raw) = &args.modulation {
        cfg.modulation = raw.parse()?;
    }
    if let Some(n) = args.pilots {
        cfg.csi_mode = CsiMode::Estimated;
        cfg.n_pilots = n;
    }
    if let Some(n) = args.target_errors {
        cfg.target_errors = n;
    }
    if let Some(n) = args.max_bits {
        cfg.max_bits = n;
    }
    if let Some(raw) = &args.curves {
        let feedbacks = parse_list(raw, "--curves", |s| s.parse::<Feedback>().ok())?;
        curves = Some(feedbacks.into_iter().map(CurveSpec::new).collect());
    }
    cfg.validate()?;

    let curves = curves.unwrap_or_else(|| {
        let mut c = vec![CurveSpec::new(Feedback::Perfect)];
        if cfg.feedback_bits != Feedback::Perfect {
            c.push(CurveSpec::new(cfg.feedback_bits));
        }
        c
    });
    validate_curves(&curves)?;
    Ok(Experiment {
        config: cfg,
        curves,
    })
}

fn validate_curves(curves: &[CurveSpec]) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Config("at least one curve is required".into()));
    }
    for (i, c) in curves.iter().enumerate() {
        let ok = !c.label.is_empty()
            && c.label
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || matches!(ch, '-' | '_' | '.'));
        if !ok {
            return Err(Error::Config(format!(
                "curve label `{}` must be non-empty and use only [A-Za-z0-9._-]",
                c.label
            )));
        }
        if curves[..i].iter().any(|o| o.label == c.label) {
            return Err(Error::Config(format!(
                "duplicate curve label `{}`",
                c.label
            )));
        }
    }
    Ok(())
}

/// Flat JSON manifest: every config field plus the curve list.
pub fn manifest_json(exp: &Experiment) -> Result<String> {
    let mut value = serde_json::to_value(&exp.config).map_err(|e| Error::Config(e.to_string()))?;
    let curves = serde_json::to_value(&exp.curves).map_err(|e| Error::Config(e.to_string()))?;
    value
        .as_object_mut()
        .expect("config serializes to an object")
        .insert("curves".into(), curves);
    let mut text =
        serde_json::to_string_pretty(&value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Curves produced by [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub curves: Vec<BerCurve>,
}

impl ExperimentReport {
    /// SNR gap of each curve to the perfect-feedback curve at `ber`; `None`
    /// where either curve does not cross `ber` or no perfect curve was run.
    pub fn gaps_at(&self, ber: f64) -> Vec<Option<f64>> {
        let reference = self
            .curves
            .iter()
            .find(|c| c.config.feedback_bits == Feedback::Perfect)
            .and_then(|c| c.snr_at_ber(ber));
        self.curves
            .iter()
            .map(|c| Some(c.snr_at_ber(ber)? - reference?))
            .collect()
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>8}", "snr_db");
        for c in &self.curves {
            let _ = write!(out, " {:>14}", c.label);
        }
        out.push('\n');
        let n_points = self.curves.first().map_or(0, |c| c.points.len());
        for i in 0..n_points {
            let _ = write!(out, "{:>8}", self.curves[0].points[i].snr_db);
            for c in &self.curves {
                let p = &c.points[i];
                let flag = if p.converged { ' ' } else { '*' };
                let _ = write!(out, " {:>13.4e}{flag}", p.ber);
            }
            out.push('\n');
        }
        let _ = write!(out, "{:>8}", "gap_dB");
        for g in self.gaps_at(GAP_BER) {
            match g {
                Some(g) => {
                    let _ = write!(out, " {g:>14.3}");
                }
                None => {
                    let _ = write!(out, " {:>14}", "n/a");
                }
            }
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "gap_dB: SNR gap to the perfect-feedback curve at BER {GAP_BER:e}; * = stopped at max_bits"
        );
        out
    }
}

/// Runs every curve, writing `<label>.csv` per curve and `manifest.json`.
pub fn run_experiment(
    exp: &Experiment,
    out_dir: &Path,
    threads: usize,
) -> Result<ExperimentReport> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(MANIFEST_NAME), manifest_json(exp)?)?;
    let mut curves = Vec::with_capacity(exp.curves.len());
    for spec in &exp.curves {
        let cfg = SimConfig {
            feedback_bits: spec.feedback_bits,
            ..exp.config.clone()
        };
        let curve = run_sweep(&cfg, &spec.label, threads)?;
        let file = fs::File::create(out_dir.join(format!("{}.csv", spec.label)))?;
        curve.write_csv(std::io::BufWriter::new(file))?;
        curves.push(curve);
    }
    Ok(ExperimentReport { curves })
}

/// Entry point behind the binary. Returns the process exit code: 0 on
/// success, 1 for configuration errors, 2 for runtime failures.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let exp = match parse_config(&args) {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run_experiment(&exp, &args.out_dir, args.threads) {
        Ok(report) => {
            print!("{}", report.render_table());
            0
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
