//! Times single-threaded trials for a few feedback settings.

use std::time::Instant;

use lfmimo::simulator::{Feedback, SimConfig, Simulator};

fn main() {
    let trials = 5_000;
    for feedback in [
        Feedback::Perfect,
        Feedback::Bits(0),
        Feedback::Bits(4),
        Feedback::Bits(8),
    ] {
        let sim = Simulator::new(SimConfig {
            feedback_bits: feedback,
            ..SimConfig::default()
        })
        .unwrap();
        let start = Instant::now();
        let mut errors = 0;
        for i in 0..trials {
            errors += sim.run_trial(10.0, i).unwrap().errors;
        }
        let per = start.elapsed().as_secs_f64() / trials as f64;
        println!(
            "{feedback:>8}: {:8.2} us/trial ({errors} errors)",
            per * 1e6
        );
    }
}
