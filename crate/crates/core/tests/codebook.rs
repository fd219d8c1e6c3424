mod common;

use std::f64::consts::PI;

use common::{
    brute_force_min_uniform_mean, c, cn, mean_and_stderr, random_matrix, random_unit,
    sigma_max_sq_2col,
};
use lfmimo::codebook::{gen_rvq, quantize_direction, select_beamformer, Codebook};
use lfmimo::numerics::CVector;
use lfmimo::rng::seeded;
use num_complex::Complex64;
use proptest::prelude::*;

/// For an isotropic unit vector in C², `|w_0|²` and `arg(w_0) / 2π` are
/// both U(0, 1).
#[test]
fn rvq_entries_are_isotropic() {
    let cb = gen_rvq(2, 13, 300).unwrap();
    let n = cb.len();
    let mut power: Vec<f64> = cb.iter().map(|w| w[0].norm_sqr()).collect();
    let mut phase: Vec<f64> = cb
        .iter()
        .map(|w| w[0].arg().rem_euclid(2.0 * PI) / (2.0 * PI))
        .collect();
    let critical = 1.63 / (n as f64).sqrt();
    let (d_power, d_phase) = (
        common::ks_uniform(&mut power),
        common::ks_uniform(&mut phase),
    );
    assert!(d_power < critical, "power KS {d_power} vs {critical}");
    assert!(d_phase < critical, "phase KS {d_phase} vs {critical}");
    assert!(cb
        .iter()
        .all(|w| (w.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12));
}

/// In C² the quantization error of one random entry is U(0, 1), so the best
/// of `2^B` has mean `1 / (2^B + 1)`.
#[test]
fn mean_distortion_follows_order_statistic_law() {
    let mut rng = seeded(301);
    let trials = 10_000;
    for bits in 1..=4u32 {
        let k = 1usize << bits;
        let samples: Vec<f64> = (0..trials)
            .map(|t| {
                let cb = gen_rvq(2, bits, 10_000 * bits + t as u32).unwrap();
                let h = CVector::new(vec![cn(&mut rng, 1.0), cn(&mut rng, 1.0)]);
                quantize_direction(&h, &cb).unwrap().distortion
            })
            .collect();
        let (mean, se) = mean_and_stderr(&samples);
        let law = 1.0 / (k as f64 + 1.0);
        assert!(
            (mean - law).abs() <= 3.0 * se,
            "B={bits}: {mean} vs {law} (se {se})"
        );
        let brute = brute_force_min_uniform_mean(&mut rng, k, 200_000);
        assert!(
            (brute - law).abs() <= 0.01 * law,
            "oracle self-check B={bits}"
        );
    }
}

#[test]
fn more_bits_approach_the_optimal_gain() {
    let mut rng = seeded(302);
    let trials = 10_000;
    let mut ratios = Vec::new();
    for bits in [2u32, 6, 10] {
        let mut total = 0.0;
        for t in 0..trials {
            let cb = gen_rvq(2, bits, t as u32).unwrap();
            let h = random_matrix(&mut rng, 2, 2);
            let q = select_beamformer(&h, &cb, 10.0).unwrap();
            total += q.metric / sigma_max_sq_2col(&h);
        }
        ratios.push(total / trials as f64);
    }
    assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2], "{ratios:?}");
    assert!(ratios[2] >= 0.95, "{ratios:?}");
}

#[test]
fn selection_does_not_depend_on_snr() {
    let mut rng = seeded(303);
    let cb = gen_rvq(2, 6, 9).unwrap();
    for _ in 0..1000 {
        let h = random_matrix(&mut rng, 2, 2);
        assert_eq!(
            select_beamformer(&h, &cb, 0.1).unwrap().index,
            select_beamformer(&h, &cb, 100.0).unwrap().index
        );
    }
}

#[test]
fn selected_gain_never_exceeds_largest_singular_value() {
    let mut rng = seeded(304);
    let cb = gen_rvq(2, 8, 10).unwrap();
    for _ in 0..2000 {
        let h = random_matrix(&mut rng, 3, 2);
        let q = select_beamformer(&h, &cb, 1.0).unwrap();
        assert!(q.metric <= sigma_max_sq_2col(&h) + 1e-9);
        assert!((0.0..=1.0).contains(&q.distortion));
    }
}

#[test]
fn distinct_seeds_give_distinct_codebooks() {
    let a = gen_rvq(4, 8, 1).unwrap();
    let b = gen_rvq(4, 8, 2).unwrap();
    for x in a.vectors() {
        for y in b.vectors() {
            assert!(x.max_abs_diff(&y) > 1e-9);
        }
    }
    assert_eq!(gen_rvq(4, 8, 1).unwrap(), a);
}

#[test]
fn nested_codebooks_never_increase_distortion() {
    let mut rng = seeded(305);
    let big = gen_rvq(3, 10, 77).unwrap();
    for _ in 0..500 {
        let h = random_unit(&mut rng, 3);
        let mut last = f64::INFINITY;
        for bits in 0..=10 {
            let d = quantize_direction(&h, &big.prefix(bits))
                .unwrap()
                .distortion;
            assert!(d <= last + 1e-15);
            last = d;
        }
    }
}

#[test]
fn codebook_file_survives_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cb.bin");
    let cb = gen_rvq(4, 5, 123).unwrap();
    cb.save(&path).unwrap();
    assert_eq!(Codebook::load(&path).unwrap(), cb);
}

proptest! {
    #[test]
    fn quantization_ignores_scale_and_phase(
        seed in any::<u64>(),
        scale in 1e-3..1e3f64,
        theta in 0.0..(2.0 * PI),
    ) {
        let mut rng = seeded(seed);
        let cb = gen_rvq(4, 6, 5).unwrap();
        let h = CVector::new((0..4).map(|_| cn(&mut rng, 1.0)).collect());
        let g = h.scale(Complex64::from_polar(scale, theta));
        let (a, b) = (quantize_direction(&h, &cb).unwrap(), quantize_direction(&g, &cb).unwrap());
        prop_assert_eq!(a.index, b.index);
        prop_assert!((a.distortion - b.distortion).abs() <= 1e-9);
    }

    #[test]
    fn quantizing_a_codebook_entry_returns_it(index in 0usize..64) {
        let cb = gen_rvq(3, 6, 11).unwrap();
        let w = cb.get(index).scale(c(0.0, 2.0));
        let q = quantize_direction(&w, &cb).unwrap();
        prop_assert_eq!(q.index, index);
        prop_assert!(q.distortion <= 1e-12);
    }
}
